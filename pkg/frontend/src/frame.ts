/**
 * Slice-frame geometry in world millimetres.
 *
 * A frame is a 4x4 matrix stored column-major as 16 numbers: columns 1-2 are
 * the in-plane unit axes, column 3 the plane normal, column 4 the plane
 * origin point. The plane-form constructor mirrors the server's deterministic
 * rule so client and server agree on oblique geometry.
 */

export type Vec3 = [number, number, number];

/** 16 numbers, column-major 4x4. */
export type SliceFrame = number[];

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.sqrt(dot(a, a));
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) {
    throw new Error("cannot normalize a zero vector");
  }
  return scale(a, 1 / n);
}

export function frameColumn(frame: SliceFrame, col: number): Vec3 {
  return [frame[4 * col], frame[4 * col + 1], frame[4 * col + 2]];
}

export function makeFrame(a1: Vec3, a2: Vec3, n: Vec3, p: Vec3): SliceFrame {
  return [
    a1[0], a1[1], a1[2], 0,
    a2[0], a2[1], a2[2], 0,
    n[0], n[1], n[2], 0,
    p[0], p[1], p[2], 1,
  ];
}

export function identityFrame(point: Vec3 = [0, 0, 0]): SliceFrame {
  return makeFrame([1, 0, 0], [0, 1, 0], [0, 0, 1], point);
}

/**
 * Deterministic in-plane axes for a plane normal: the first axis is the
 * normalized rejection of the canonical axis least aligned with the normal,
 * the second is normal x first. Matches the server's frame-construction rule.
 */
export function planeFrame(normal: Vec3, point: Vec3): SliceFrame {
  const n = normalize(normal);
  const abs = n.map(Math.abs);
  let least = 0;
  if (abs[1] < abs[least]) least = 1;
  if (abs[2] < abs[least]) least = 2;
  const e: Vec3 = [0, 0, 0];
  e[least] = 1;
  const a1 = normalize(sub(e, scale(n, dot(e, n))));
  const a2 = cross(n, a1);
  return makeFrame(a1, a2, n, point);
}

/** Gram-Schmidt on the two in-plane axes; normal rebuilt as a1 x a2. */
export function orthonormalize(frame: SliceFrame): SliceFrame {
  const a1 = normalize(frameColumn(frame, 0));
  const raw2 = frameColumn(frame, 1);
  const a2 = normalize(sub(raw2, scale(a1, dot(raw2, a1))));
  return makeFrame(a1, a2, cross(a1, a2), frameColumn(frame, 3));
}

/** Rotation of vector v about unit axis k by angle (Rodrigues). */
function rotateAbout(v: Vec3, k: Vec3, angle: number): Vec3 {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  return add(
    add(scale(v, c), scale(cross(k, v), s)),
    scale(k, dot(k, v) * (1 - c)),
  );
}

/**
 * Tilt a frame about one of its in-plane axes (0 or 1) by `angle` radians,
 * pivoting on the crosshair point so all planes keep passing through it.
 * The result is re-orthonormalized so repeated tilts cannot drift.
 */
export function tiltFrame(
  frame: SliceFrame,
  inPlaneAxis: 0 | 1,
  angle: number,
  pivot: Vec3,
): SliceFrame {
  const k = normalize(frameColumn(frame, inPlaneAxis));
  const a1 = rotateAbout(frameColumn(frame, 0), k, angle);
  const a2 = rotateAbout(frameColumn(frame, 1), k, angle);
  const origin = frameColumn(frame, 3);
  const rotatedOrigin = add(pivot, rotateAbout(sub(origin, pivot), k, angle));
  const n = cross(a1, a2);
  return orthonormalize(makeFrame(a1, a2, n, rotatedOrigin));
}

/** Worst deviation of the 3x3 block from orthonormality. */
export function orthonormalityError(frame: SliceFrame): number {
  let worst = 0;
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      const d = dot(frameColumn(frame, i), frameColumn(frame, j));
      worst = Math.max(worst, Math.abs(d - (i === j ? 1 : 0)));
    }
  }
  return worst;
}

/** Comma-separated column-major serialization used in query strings. */
export function frameToQuery(frame: SliceFrame): string {
  return frame.map((v) => String(v)).join(",");
}

export function frameFromQuery(text: string): SliceFrame {
  const values = text.split(",").map(Number);
  if (values.length !== 16 || values.some((v) => !Number.isFinite(v))) {
    throw new Error("frame query must hold 16 finite numbers");
  }
  return values;
}
