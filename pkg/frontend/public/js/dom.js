// Small DOM construction helper. Everything goes through textContent-style
// appends, so values from the server can never be interpreted as markup.
export function el(doc, tag, attrs = {}, ...children) {
    const node = doc.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    for (const child of children) {
        node.append(child);
    }
    return node;
}
