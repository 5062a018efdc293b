/**
 * Equivalence suite: every bound analysis must return values bit-identical
 * to what the pmg CLI reports on the same input bytes (the circle, sphere,
 * and synthetic-suite fixtures), and CLI errors must surface as exceptions
 * with the same messages.
 */

import { execFileSync } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, describe, expect, it, vi } from 'vitest';

import {
  BoundArray,
  bias_report,
  curvature_profile,
  encodePmg1,
  global_id,
  hole_metrics,
} from '../src/index.js';

const PMG = process.env.PMG_CLI ?? 'pmg';
const scratch = mkdtempSync(join(tmpdir(), 'pmg-ts-test-'));

afterAll(() => rmSync(scratch, { recursive: true, force: true }));

function cli(args: string[]): any {
  return JSON.parse(execFileSync(PMG, args, { encoding: 'utf-8' }));
}

function cloudFile(name: string, array: BoundArray): string {
  const path = join(scratch, name);
  writeFileSync(path, encodePmg1(array));
  return path;
}

/** Evenly spaced points on a circle; deterministic without an RNG. */
function circle(n: number, radius = 1.0): BoundArray {
  const data = new Float64Array(n * 2);
  for (let i = 0; i < n; i++) {
    const theta = (2 * Math.PI * i) / n;
    data[2 * i] = radius * Math.cos(theta);
    data[2 * i + 1] = radius * Math.sin(theta);
  }
  return { data, n, p: 2 };
}

/** Fibonacci sphere; deterministic without an RNG. */
function sphere(n: number, radius = 1.0): BoundArray {
  const data = new Float64Array(n * 3);
  const golden = Math.PI * (3 - Math.sqrt(5));
  for (let i = 0; i < n; i++) {
    const y = 1 - (2 * (i + 0.5)) / n;
    const r = Math.sqrt(1 - y * y);
    const theta = golden * i;
    data[3 * i] = radius * r * Math.cos(theta);
    data[3 * i + 1] = radius * y;
    data[3 * i + 2] = radius * r * Math.sin(theta);
  }
  return { data, n, p: 3 };
}

describe('global_id', () => {
  it('matches the CLI bit-for-bit on the circle fixture', () => {
    const arr = circle(400);
    const fromBinding = global_id(arr, { k: 20 });
    const fromCli = cli([
      'id', '--input', cloudFile('circle-id.pmg', arr), '--format', 'binary', '--k', '20',
    ]);
    expect(fromBinding).toBe(fromCli.global_id);
    expect(fromBinding).toBeGreaterThan(0.7);
    expect(fromBinding).toBeLessThan(1.3);
  });

  it('matches the CLI for the mle method on the sphere fixture', () => {
    const arr = sphere(500);
    const fromBinding = global_id(arr, { k: 15, method: 'mle' });
    const fromCli = cli([
      'id', '--input', cloudFile('sphere-id.pmg', arr), '--format', 'binary',
      '--k', '15', '--method', 'mle',
    ]);
    expect(fromBinding).toBe(fromCli.global_id);
  });

  it('rejects an empty array', () => {
    expect(() => global_id({ data: new Float64Array(0), n: 0, p: 0 })).toThrow(/shape/);
  });

  it('rejects k >= n naming the constraint', () => {
    expect(() => global_id(circle(10), { k: 10 })).toThrow(/k must satisfy 1 <= k <= n-1/);
  });

  it('rejects a shape/buffer mismatch', () => {
    expect(() => global_id({ data: new Float64Array(5), n: 3, p: 2 })).toThrow(/buffer length/);
  });

  it('converts float32 input with a warning', () => {
    const warn = vi.spyOn(console, 'warn').mockImplementation(() => {});
    const f32 = new Float32Array(circle(200).data);
    const value = global_id({ data: f32, n: 200, p: 2 }, { k: 10 });
    expect(warn).toHaveBeenCalledWith(expect.stringContaining('float32'));
    expect(Number.isFinite(value)).toBe(true);
    warn.mockRestore();
  });
});

describe('curvature_profile', () => {
  it('matches the CLI bit-for-bit on the sphere fixture', () => {
    const arr = sphere(1000);
    const fromBinding = curvature_profile(arr, { k: 30, m: 2 });
    const fromCli = cli([
      'curvature', '--input', cloudFile('sphere-curv.pmg', arr), '--format', 'binary',
      '--k', '30', '--m', '2',
    ]);
    expect(fromBinding.mean).toBe(fromCli.mean_curvature);
    expect(fromBinding.mean_abs).toBe(fromCli.mean_abs_curvature);
    expect(fromBinding.skipped).toBe(fromCli.skipped);
    expect(fromBinding.mean).toBeGreaterThan(0.7);
    expect(fromBinding.mean).toBeLessThan(1.3);
  });

  it('matches the CLI bit-for-bit on the circle fixture', () => {
    const arr = circle(200);
    const fromBinding = curvature_profile(arr, { k: 20, m: 1 });
    const fromCli = cli([
      'curvature', '--input', cloudFile('circle-curv.pmg', arr), '--format', 'binary',
      '--k', '20', '--m', '1',
    ]);
    expect(fromBinding.mean).toBe(fromCli.mean_curvature);
    expect(fromBinding.mean_abs).toBe(fromCli.mean_abs_curvature);
  });

  it('rejects an invalid tangent dimension with the CLI message', () => {
    expect(() => curvature_profile(circle(50), { m: 0 })).toThrow(/m must be >= 1/);
  });

  it('rejects k >= n naming the constraint', () => {
    expect(() => curvature_profile(circle(10), { k: 12 })).toThrow(/k must satisfy/);
  });
});

describe('hole_metrics', () => {
  it('finds the circle hole, matching the CLI bit-for-bit', () => {
    const arr = circle(150);
    const fromBinding = hole_metrics(arr);
    const fromCli = cli([
      'holes', '--input', cloudFile('circle-holes.pmg', arr), '--format', 'binary',
    ]);
    expect(fromBinding.n_holes).toBe(1);
    expect(fromBinding.n_holes).toBe(fromCli.n_holes);
    expect(fromBinding.total).toBe(fromCli.total_persistence);
    expect(fromBinding.avg).toBe(fromCli.avg_persistence);
    expect(fromBinding.density).toBe(fromCli.persistence_density);
  });

  it('reports no holes for a contractible grid blob', () => {
    const side = 12;
    const data = new Float64Array(side * side * 2);
    for (let i = 0; i < side; i++) {
      for (let j = 0; j < side; j++) {
        data[2 * (i * side + j)] = i / side;
        data[2 * (i * side + j) + 1] = j / side;
      }
    }
    const result = hole_metrics({ data, n: side * side, p: 2 });
    expect(result.n_holes).toBe(0);
    expect(result.total).toBe(0);
  });

  it('rejects a negative tau with the CLI message', () => {
    expect(() => hole_metrics(circle(40), { tau: -1 })).toThrow(/tau must be >= 0/);
  });
});

describe('bias_report', () => {
  it('matches a direct CLI run byte-for-byte on the synthetic suite', () => {
    const emb = join(scratch, 'embeddings');
    execFileSync('mkdir', ['-p', emb]);
    const accLines: string[] = [];
    for (let dim = 1; dim <= 4; dim++) {
      execFileSync(PMG, [
        'sample', '--kind', 'hypercube', '--n', '120', '--dim', String(dim),
        '--ambient', '6', '--seed', String(900 + dim),
        '--output', join(emb, `class${dim}.csv`),
      ]);
      accLines.push(`class${dim},${(1.0 - 0.1 * dim).toFixed(1)}`);
    }
    const accPath = join(scratch, 'accuracy.csv');
    writeFileSync(accPath, accLines.join('\n') + '\n');

    const fromBinding = bias_report(emb, accPath, { max_points: 100 });
    const outPath = join(scratch, 'cli-report.json');
    execFileSync(PMG, [
      'report', '--embeddings', emb, '--accuracy', accPath,
      '--max-points', '100', '--output', outPath,
    ]);
    const fromCli = execFileSync('cat', [outPath], { encoding: 'utf-8' });
    expect(fromBinding.raw).toBe(fromCli);
    expect(fromBinding.report.correlations.global_id).toBeLessThan(0);
  });

  it('propagates the too-few-classes error', () => {
    const emb = join(scratch, 'two-classes');
    execFileSync('mkdir', ['-p', emb]);
    for (const label of ['a', 'b']) {
      execFileSync(PMG, [
        'sample', '--kind', 'circle', '--n', '60', '--output', join(emb, `${label}.csv`),
      ]);
    }
    const acc = join(scratch, 'two.csv');
    writeFileSync(acc, 'a,0.5\nb,0.6\n');
    expect(() => bias_report(emb, acc)).toThrow(/3 matched classes/);
  });
});
