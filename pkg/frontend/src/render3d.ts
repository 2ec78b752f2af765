/** Minimal orthographic 3D projection for point and cube-glyph rendering.
 *
 * No WebGL: the volume views draw a few thousand efficient points and shell
 * voxels, which a 2D canvas handles comfortably and which keeps the render
 * math unit-testable.
 */

export interface Camera {
  yaw: number;   // rotation about the vertical axis, radians
  pitch: number; // tilt toward the viewer, radians
  scale: number; // canvas pixels per world unit
  cx: number;    // canvas center
  cy: number;
}

export interface Projected {
  x: Float64Array;
  y: Float64Array;
  depth: Float64Array;
}

/** Rotate about z by yaw, then about x by pitch, drop the view axis. */
export function project(camera: Camera, points: ArrayLike<number>,
                        center: number[]): Projected {
  const n = Math.floor(points.length / 3);
  const out = {
    x: new Float64Array(n),
    y: new Float64Array(n),
    depth: new Float64Array(n),
  };
  const cy = Math.cos(camera.yaw);
  const sy = Math.sin(camera.yaw);
  const cp = Math.cos(camera.pitch);
  const sp = Math.sin(camera.pitch);
  for (let i = 0; i < n; i++) {
    const x = points[i * 3] - center[0];
    const y = points[i * 3 + 1] - center[1];
    const z = points[i * 3 + 2] - center[2];
    const rx = cy * x + sy * y;
    const ry = -sy * x + cy * y;
    const vy = cp * ry - sp * z;
    const vz = sp * ry + cp * z;
    out.x[i] = camera.cx + camera.scale * rx;
    out.y[i] = camera.cy - camera.scale * vz;
    out.depth[i] = vy;
  }
  return out;
}

/** Indices sorted back-to-front so nearer glyphs paint over farther ones. */
export function drawOrder(depth: Float64Array): number[] {
  const order = Array.from(depth.keys());
  order.sort((a, b) => depth[b] - depth[a]);
  return order;
}

/** Screen-space square size for a cube glyph of world half-width `half`. */
export function glyphSize(camera: Camera, half: number): number {
  return Math.max(1, 2 * half * camera.scale);
}

export function rotate(camera: Camera, dYaw: number, dPitch: number): Camera {
  const pitch = Math.max(-1.5, Math.min(1.5, camera.pitch + dPitch));
  return { ...camera, yaw: camera.yaw + dYaw, pitch };
}
