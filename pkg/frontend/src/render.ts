// SVG painter for scenes. All semantics live in scene.ts; this file only
// maps normalized [0, 1] channel values onto pixels, colors, and widths,
// monotonically in the resolved value.

import type { Scene, SceneMark } from "./scene.js";

export interface PaintCallbacks {
  onMarkEnter?: (mark: SceneMark) => void;
  onMarkLeave?: (mark: SceneMark) => void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function rampColor(value: number | null, fallback = "#5b8db8"): string {
  if (value === null) return fallback;
  const light = 92 - value * 58; // higher value -> darker
  return `hsl(213, 62%, ${light}%)`;
}

function el<K extends keyof SVGElementTagNameMap>(tag: K, attrs: Record<string, string | number>) {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, val] of Object.entries(attrs)) {
    node.setAttribute(key, String(val));
  }
  return node;
}

interface Frame {
  width: number;
  height: number;
  pad: number;
}

function px(frame: Frame, x: number | null): number {
  return frame.pad + (x ?? 0.5) * (frame.width - 2 * frame.pad);
}

function py(frame: Frame, y: number | null): number {
  // SVG y grows downward; flip so 1.0 renders at the top.
  return frame.height - frame.pad - (y ?? 0.5) * (frame.height - 2 * frame.pad);
}

function markRadius(mark: SceneMark): number {
  return 4 + (mark.size ?? 0.4) * 10;
}

function applyPaint(node: SVGElement, mark: SceneMark): void {
  node.setAttribute("fill", rampColor(mark.fill));
  if (mark.fillOpacity !== null) node.setAttribute("fill-opacity", String(0.15 + 0.85 * mark.fillOpacity));
  node.setAttribute("stroke", mark.stroke !== null ? rampColor(mark.stroke) : "#33506b");
  if (mark.strokeOpacity !== null) {
    node.setAttribute("stroke-opacity", String(0.15 + 0.85 * mark.strokeOpacity));
  }
  node.setAttribute("stroke-width", String(0.75 + (mark.strokeWidth ?? 0.1) * 4));
}

const SHAPE_ORDER = ["circle", "square", "triangle", "diamond", "cross"];

function shapeFor(mark: SceneMark, shapes: Map<string, string>): string {
  if (mark.shape === null) return "circle";
  if (!shapes.has(mark.shape)) {
    shapes.set(mark.shape, SHAPE_ORDER[shapes.size % SHAPE_ORDER.length]);
  }
  return shapes.get(mark.shape) as string;
}

function pointNode(frame: Frame, mark: SceneMark, shapes: Map<string, string>): SVGElement {
  const cx = px(frame, mark.x);
  const cy = py(frame, mark.y);
  const r = markRadius(mark);
  const shape = shapeFor(mark, shapes);
  if (shape === "square") {
    return el("rect", { x: cx - r, y: cy - r, width: 2 * r, height: 2 * r });
  }
  if (shape === "triangle") {
    return el("polygon", { points: `${cx},${cy - r} ${cx - r},${cy + r} ${cx + r},${cy + r}` });
  }
  if (shape === "diamond") {
    return el("polygon", { points: `${cx},${cy - r} ${cx - r},${cy} ${cx},${cy + r} ${cx + r},${cy}` });
  }
  if (shape === "cross") {
    return el("path", {
      d: `M ${cx - r} ${cy} H ${cx + r} M ${cx} ${cy - r} V ${cy + r}`,
      fill: "none",
    });
  }
  return el("circle", { cx, cy, r });
}

export function paintScene(
  svg: SVGSVGElement,
  scene: Scene,
  callbacks: PaintCallbacks = {},
): void {
  svg.innerHTML = "";
  const frame: Frame = {
    width: svg.clientWidth || Number(svg.getAttribute("width")) || 640,
    height: svg.clientHeight || Number(svg.getAttribute("height")) || 360,
    pad: 28,
  };

  // Axes frame.
  svg.appendChild(
    el("rect", {
      x: frame.pad,
      y: frame.pad,
      width: frame.width - 2 * frame.pad,
      height: frame.height - 2 * frame.pad,
      fill: "none",
      stroke: "#d7dee6",
    }),
  );

  const shapes = new Map<string, string>();
  const ordered = [...scene.marks];

  if (scene.mark === "line" || scene.mark === "area") {
    ordered.sort((a, b) => (a.x ?? 0.5) - (b.x ?? 0.5));
    const points = ordered.map((m) => `${px(frame, m.x)},${py(frame, m.y)}`);
    if (scene.mark === "area" && ordered.length > 0) {
      const base = py(frame, 0);
      const first = px(frame, ordered[0].x);
      const last = px(frame, ordered[ordered.length - 1].x);
      const node = el("polygon", { points: `${first},${base} ${points.join(" ")} ${last},${base}` });
      applyPaint(node, ordered[0]);
      svg.appendChild(node);
    } else if (ordered.length > 0) {
      const node = el("polyline", { points: points.join(" "), fill: "none" });
      applyPaint(node, ordered[0]);
      svg.appendChild(node);
    }
  }

  for (const mark of ordered) {
    let node: SVGElement | null = null;
    if (scene.mark === "point") {
      node = pointNode(frame, mark, shapes);
      applyPaint(node, mark);
    } else if (scene.mark === "bar") {
      const bandWidth = Math.max(10, (frame.width - 2 * frame.pad) / Math.max(scene.marks.length, 1) - 6);
      const cx = px(frame, mark.x);
      const top = py(frame, mark.y ?? 1);
      const base = py(frame, 0);
      node = el("rect", {
        x: cx - bandWidth / 2,
        y: Math.min(top, base),
        width: bandWidth,
        height: Math.max(2, Math.abs(base - top)),
      });
      applyPaint(node, mark);
    } else if (scene.mark === "text") {
      node = el("text", { x: px(frame, mark.x), y: py(frame, mark.y), "font-size": 12 });
      node.textContent = mark.text ?? mark.entity;
      node.setAttribute("fill", rampColor(mark.fill, "#33506b"));
    } else {
      // line/area already painted as one geometry; add hover handles.
      node = el("circle", { cx: px(frame, mark.x), cy: py(frame, mark.y), r: 5, opacity: 0 });
    }

    if (mark.tooltip) {
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = Object.entries(mark.tooltip)
        .map(([k, v]) => `${k}: ${v}`)
        .join("\n");
      node.appendChild(title);
    }
    if (callbacks.onMarkEnter) {
      node.addEventListener("pointerenter", () => callbacks.onMarkEnter?.(mark));
    }
    if (callbacks.onMarkLeave) {
      node.addEventListener("pointerleave", () => callbacks.onMarkLeave?.(mark));
    }
    node.classList.add("mark");
    svg.appendChild(node);

    if (mark.annotation !== null) {
      const label = el("text", {
        x: px(frame, mark.x) + markRadius(mark) + 3,
        y: py(frame, mark.y) - markRadius(mark) - 3,
        "font-size": 10,
        fill: "#44607c",
      });
      label.textContent = mark.annotation;
      svg.appendChild(label);
    }
  }
}
