// Small DOM construction helpers; no framework, just elements.

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

type Cleanable = Element & { __viewCleanup?: (() => void)[] };

/** Register a teardown (e.g. a store unsubscribe) tied to this view root. */
export function addCleanup(root: Element, fn: () => void): void {
  ((root as Cleanable).__viewCleanup ??= []).push(fn);
}

/** Run registered teardowns and empty the root; call at the top of a view render. */
export function resetView(root: Element): void {
  const fns = (root as Cleanable).__viewCleanup ?? [];
  (root as Cleanable).__viewCleanup = [];
  for (const fn of fns) fn();
  clear(root);
}

export function errorBanner(message: string, retryLabel?: string, onRetry?: () => void): HTMLElement {
  const banner = el("div", { class: "banner error", role: "alert" }, el("span", {}, message));
  if (onRetry && retryLabel) {
    const btn = el("button", { class: "retry", type: "button" }, retryLabel);
    btn.addEventListener("click", onRetry);
    banner.append(btn);
  }
  return banner;
}
