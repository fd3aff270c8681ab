/**
 * Client-side distribution distances, numerically identical to the server's
 * evaluation formulas: category totals are normalized, floored with the same
 * smoothing epsilon, and compared in nats.
 */

export const SMOOTHING_EPS = 1e-10;

/** Normalize raw category totals into a strictly positive distribution. */
export function smoothedDistribution(totals: number[]): number[] {
  const mass = totals.reduce((acc, v) => acc + v, 0);
  const m = totals.length;
  const base = mass > 0 ? totals.map((v) => v / mass) : totals.map(() => 1 / m);
  return base.map((v) => (v + SMOOTHING_EPS) / (1 + m * SMOOTHING_EPS));
}

function checkPair(p: number[], q: number[]): void {
  if (p.length !== q.length || p.length === 0) {
    throw new Error(`probability vectors must share one length, got ${p.length} and ${q.length}`);
  }
}

export function klDivergence(p: number[], q: number[]): number {
  checkPair(p, q);
  let acc = 0;
  for (let i = 0; i < p.length; i++) acc += p[i] * Math.log(p[i] / q[i]);
  return acc;
}

export function jsDivergence(p: number[], q: number[]): number {
  checkPair(p, q);
  const mid = p.map((v, i) => 0.5 * (v + q[i]));
  return 0.5 * klDivergence(p, mid) + 0.5 * klDivergence(q, mid);
}

export function hellingerDistance(p: number[], q: number[]): number {
  checkPair(p, q);
  let acc = 0;
  for (let i = 0; i < p.length; i++) acc += (Math.sqrt(p[i]) - Math.sqrt(q[i])) ** 2;
  return Math.sqrt(acc) / Math.SQRT2;
}

export function cosineDistance(p: number[], q: number[]): number {
  checkPair(p, q);
  let dot = 0;
  let np = 0;
  let nq = 0;
  for (let i = 0; i < p.length; i++) {
    dot += p[i] * q[i];
    np += p[i] * p[i];
    nq += q[i] * q[i];
  }
  return 1 - dot / (Math.sqrt(np) * Math.sqrt(nq));
}

export interface DistancePanel {
  kl: number;
  js: number;
  hd: number;
  cos: number;
}

/** All four distances between two raw category-total vectors. */
export function distancePanel(totalsA: number[], totalsB: number[]): DistancePanel {
  const p = smoothedDistribution(totalsA);
  const q = smoothedDistribution(totalsB);
  return {
    kl: klDivergence(p, q),
    js: jsDivergence(p, q),
    hd: hellingerDistance(p, q),
    cos: cosineDistance(p, q),
  };
}
