// Plain-SVG map rendering: polygons straight from API payloads, named
// layers, and client→map coordinate conversion.  No tiles, no projection —
// the data is already on a flat plane; y is flipped so north is up.

import type { Ring } from "./api";
import { cellPolygon, parseCell, type FamilyGeom } from "./hex";

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export interface DrawOptions {
  title?: string;
  data?: Record<string, string>;
  onClick?: (ev: MouseEvent) => void;
}

export class MapView {
  readonly svg: SVGSVGElement;
  private layers = new Map<string, SVGGElement>();

  constructor(
    container: HTMLElement,
    readonly bbox: [number, number, number, number],
    cls = "map",
  ) {
    const [x0, y0, x1, y1] = bbox;
    this.svg = svgEl("svg", {
      class: cls,
      viewBox: `${x0} ${-y1} ${x1 - x0} ${y1 - y0}`,
      preserveAspectRatio: "xMidYMid meet",
      role: "img",
    });
    container.appendChild(this.svg);
  }

  layer(name: string): SVGGElement {
    let g = this.layers.get(name);
    if (!g) {
      g = svgEl("g", { "data-layer": name });
      this.layers.set(name, g);
      this.svg.appendChild(g);
    }
    return g;
  }

  clearLayer(name: string): SVGGElement {
    const g = this.layer(name);
    while (g.firstChild) g.removeChild(g.firstChild);
    return g;
  }

  private pathData(rings: Ring[]): string {
    return rings
      .map((ring) => {
        const parts = ring.map(([x, y], i) => `${i === 0 ? "M" : "L"}${x},${-y}`);
        return `${parts.join(" ")} Z`;
      })
      .join(" ");
  }

  drawPolygon(layerName: string, rings: Ring[], cls: string, options: DrawOptions = {}): SVGPathElement {
    const path = svgEl("path", {
      d: this.pathData(rings),
      class: cls,
      "fill-rule": "evenodd",
    });
    if (options.title) {
      const title = svgEl("title");
      title.textContent = options.title;
      path.appendChild(title);
    }
    for (const [key, value] of Object.entries(options.data ?? {})) {
      path.setAttribute(`data-${key}`, value);
    }
    if (options.onClick) path.addEventListener("click", options.onClick);
    this.layer(layerName).appendChild(path);
    return path;
  }

  drawCell(layerName: string, cellId: string, fam: FamilyGeom, cls: string): SVGPathElement {
    const ring = cellPolygon(parseCell(cellId), fam);
    return this.drawPolygon(layerName, [ring], cls, { data: { cell: cellId } });
  }

  drawLine(layerName: string, points: [number, number][], cls: string): SVGPolylineElement {
    const line = svgEl("polyline", {
      points: points.map(([x, y]) => `${x},${-y}`).join(" "),
      class: cls,
    });
    this.layer(layerName).appendChild(line);
    return line;
  }

  /** Convert a mouse event to map coordinates via the rendered rectangle. */
  mapPoint(ev: { clientX: number; clientY: number }): [number, number] {
    const rect = this.svg.getBoundingClientRect();
    const width = rect.width || 1;
    const height = rect.height || 1;
    const [x0, y0, x1, y1] = this.bbox;
    const x = x0 + ((ev.clientX - rect.left) / width) * (x1 - x0);
    const y = y1 - ((ev.clientY - rect.top) / height) * (y1 - y0);
    return [x, y];
  }
}
