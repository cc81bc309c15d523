// Small display formatters. Distances are shown exactly as the service
// reported them, to 4 decimals - the UI never recomputes them.

export function formatDistance(d: number): string {
  return d.toFixed(4);
}

export function formatAngle(deg: number): string {
  return `${deg.toFixed(1)}°`;
}

export function formatMs(ms: number): string {
  return `${ms.toFixed(1)} ms`;
}

export function formatBytes(n: number): string {
  if (n >= 1024 * 1024) return `${(n / (1024 * 1024)).toFixed(1)} MB`;
  if (n >= 1024) return `${(n / 1024).toFixed(1)} kB`;
  return `${n} B`;
}

/**
 * CSS transform that previews the orientation correction. The predicted
 * angle is counter-clockwise from upright while css rotate() turns
 * clockwise, so applying the angle as-is undoes the rotation.
 */
export function correctionTransform(angleDeg: number): string {
  return `rotate(${angleDeg}deg)`;
}
