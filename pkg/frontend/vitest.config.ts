import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // Integration tests spawn a real server subprocess; give setup room.
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
