// Display formatting only: nothing here invents data, it just renders what
// the API returned.
// Absent cells (a param or tag one run has and another lacks) render as an
// em dash so emptiness is visibly different from an empty string.
export const ABSENT = "—";
export function formatTime(ms) {
    if (ms === undefined)
        return ABSENT;
    return new Date(ms).toISOString().replace("T", " ").slice(0, 19);
}
export function formatNumber(value) {
    // String() keeps the value exactly as JSON parsed it, so table cells can
    // be compared verbatim against API responses.
    return String(value);
}
export function shortId(id) {
    return id.length > 10 ? id.slice(0, 10) : id;
}
// Server parse errors report byte offsets into the UTF-8 encoding of the
// filter text; convert to a character column so the caret lands correctly
// under multibyte input.
export function byteOffsetToColumn(text, byteOffset) {
    const bytes = new TextEncoder().encode(text);
    const clamped = Math.max(0, Math.min(byteOffset, bytes.length));
    return new TextDecoder("utf-8", { fatal: false }).decode(bytes.slice(0, clamped)).length;
}
