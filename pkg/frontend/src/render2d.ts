/** Pixel-canvas helpers for the 2D panes.
 *
 * The service sends per-cell RGB in grid linear order (axis 1 fastest,
 * axis 2 ascending); canvases draw top-down, so rows are flipped here to put
 * the largest x2 on top. Zoom/pan is a plain affine viewport on top of the
 * pixel image.
 */

export function rgbToRgba(rgb: Uint8ClampedArray, width: number,
                          height: number): Uint8ClampedArray {
  if (rgb.length !== width * height * 3) {
    throw new Error(`rgb payload has ${rgb.length} bytes, expected ${width * height * 3}`);
  }
  const out = new Uint8ClampedArray(width * height * 4);
  for (let row = 0; row < height; row++) {
    const src = (height - 1 - row) * width * 3;
    const dst = row * width * 4;
    for (let col = 0; col < width; col++) {
      out[dst + col * 4] = rgb[src + col * 3];
      out[dst + col * 4 + 1] = rgb[src + col * 3 + 1];
      out[dst + col * 4 + 2] = rgb[src + col * 3 + 2];
      out[dst + col * 4 + 3] = 255;
    }
  }
  return out;
}

export interface Viewport {
  scale: number;   // canvas pixels per image pixel
  offsetX: number; // canvas position of image pixel (0, 0)
  offsetY: number;
}

export function fitViewport(imageW: number, imageH: number,
                            canvasW: number, canvasH: number): Viewport {
  const scale = Math.min(canvasW / imageW, canvasH / imageH);
  return {
    scale,
    offsetX: (canvasW - imageW * scale) / 2,
    offsetY: (canvasH - imageH * scale) / 2,
  };
}

/** Zoom by a factor keeping the canvas point (cx, cy) fixed. */
export function zoomAt(vp: Viewport, factor: number, cx: number, cy: number): Viewport {
  const scale = Math.max(1e-3, Math.min(1e4, vp.scale * factor));
  const applied = scale / vp.scale;
  return {
    scale,
    offsetX: cx - (cx - vp.offsetX) * applied,
    offsetY: cy - (cy - vp.offsetY) * applied,
  };
}

export function panBy(vp: Viewport, dx: number, dy: number): Viewport {
  return { scale: vp.scale, offsetX: vp.offsetX + dx, offsetY: vp.offsetY + dy };
}

export function imageToCanvas(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.offsetX + x * vp.scale, vp.offsetY + y * vp.scale];
}

export function canvasToImage(vp: Viewport, x: number, y: number): [number, number] {
  return [(x - vp.offsetX) / vp.scale, (y - vp.offsetY) / vp.scale];
}

/** Map a decision-space point to image pixel coordinates (top-left origin). */
export function pointToPixel(x: number, y: number,
                             lower: number[], upper: number[],
                             width: number, height: number): [number, number] {
  const px = ((x - lower[0]) / (upper[0] - lower[0])) * width;
  const py = (1 - (y - lower[1]) / (upper[1] - lower[1])) * height;
  return [px, py];
}
