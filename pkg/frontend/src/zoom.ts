// Pure viewport math for pan/zoom over the rendered SVG. The identity
// viewport is the "fit" state; reset always returns to it.

export interface Viewport {
  scale: number;
  tx: number;
  ty: number;
}

export const IDENTITY: Viewport = { scale: 1, tx: 0, ty: 0 };

const MIN_SCALE = 0.2;
const MAX_SCALE = 8;

export function reset(): Viewport {
  return { ...IDENTITY };
}

export function isIdentity(v: Viewport): boolean {
  return v.scale === 1 && v.tx === 0 && v.ty === 0;
}

/** Zoom by a factor keeping the content point under (cx, cy) stationary. */
export function zoomAt(v: Viewport, factor: number, cx: number, cy: number): Viewport {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, v.scale * factor));
  const applied = scale / v.scale;
  return {
    scale,
    tx: cx - (cx - v.tx) * applied,
    ty: cy - (cy - v.ty) * applied,
  };
}

export function pan(v: Viewport, dx: number, dy: number): Viewport {
  return { scale: v.scale, tx: v.tx + dx, ty: v.ty + dy };
}

/** Screen position of a content point under the viewport. */
export function project(v: Viewport, x: number, y: number): [number, number] {
  return [v.tx + x * v.scale, v.ty + y * v.scale];
}

export function toTransform(v: Viewport): string {
  return `translate(${v.tx} ${v.ty}) scale(${v.scale})`;
}
