/**
 * Bindings for the pmg point-cloud geometry toolkit.
 *
 * Each call converts the caller's array once into the PMG1 binary format
 * (bit-exact float64), drives the `pmg` CLI on a temporary file, and maps
 * the JSON result back. CLI failures surface as exceptions carrying the
 * CLI's own diagnostic message. No references to caller memory are
 * retained after a call returns.
 */

import { execFileSync } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

/** Contiguous row-major float64 buffer with its (n, p) shape. */
export interface BoundArray {
  data: Float64Array | Float32Array;
  n: number;
  p: number;
}

export interface GlobalIdOptions {
  k?: number;
  method?: 'tle' | 'mle';
}

export interface CurvatureOptions {
  k?: number;
  m?: number | 'auto';
}

export interface CurvatureResult {
  mean: number;
  mean_abs: number;
  skipped: number;
}

export interface HoleOptions {
  tau?: number | 'auto';
  epsilon_max?: number | 'auto';
  max_points?: number;
  seed?: number;
}

export interface HoleResult {
  n_holes: number;
  total: number;
  avg: number;
  density: number;
}

export interface BiasReportOptions {
  k?: number;
  m?: number | 'auto';
  tau?: number | 'auto';
  epsilon_max?: number | 'auto';
  max_points?: number;
  seed?: number;
  curvature_measure?: 'abs' | 'signed';
}

const PMG_BIN = process.env.PMG_CLI ?? 'pmg';

function toFloat64(array: BoundArray): Float64Array {
  if (!Number.isInteger(array.n) || !Number.isInteger(array.p) || array.n < 1 || array.p < 1) {
    throw new Error(`invalid shape (${array.n}, ${array.p}): need n >= 1 and p >= 1`);
  }
  if (array.data.length !== array.n * array.p) {
    throw new Error(
      `buffer length ${array.data.length} does not match shape (${array.n}, ${array.p})`,
    );
  }
  if (array.data instanceof Float32Array) {
    console.warn('pmg bindings: converting float32 input to float64');
    return Float64Array.from(array.data);
  }
  return array.data;
}

/** Serialize to the PMG1 binary format (magic, LE u32 n and p, f64 data). */
export function encodePmg1(array: BoundArray): Buffer {
  const data = toFloat64(array);
  const buffer = Buffer.alloc(12 + 8 * data.length);
  buffer.write('PMG1', 0, 'ascii');
  buffer.writeUInt32LE(array.n, 4);
  buffer.writeUInt32LE(array.p, 8);
  for (let i = 0; i < data.length; i++) {
    buffer.writeDoubleLE(data[i], 12 + 8 * i);
  }
  return buffer;
}

function runCli(args: string[]): string {
  try {
    return execFileSync(PMG_BIN, args, { encoding: 'utf-8' });
  } catch (err: any) {
    const stderr: string = err.stderr?.toString() ?? '';
    const line = stderr.trim().split('\n').pop() ?? '';
    let message: string | undefined;
    try {
      message = JSON.parse(line).message;
    } catch {
      // stderr was not a structured diagnostic
    }
    throw new Error(message ?? `pmg invocation failed: ${stderr || err.message}`);
  }
}

function withCloudFile<T>(array: BoundArray, fn: (path: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), 'pmg-'));
  const path = join(dir, 'cloud.pmg');
  try {
    writeFileSync(path, encodePmg1(array));
    return fn(path);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function optionArgs(options: object): string[] {
  const args: string[] = [];
  for (const [key, value] of Object.entries(options)) {
    if (value !== undefined) {
      args.push(`--${key.replace(/_/g, '-')}`, String(value));
    }
  }
  return args;
}

/** Global intrinsic dimension of the cloud (TLE by default). */
export function global_id(array: BoundArray, options: GlobalIdOptions = {}): number {
  if (options.k !== undefined && options.k >= array.n) {
    throw new Error(`k must satisfy 1 <= k <= n-1 = ${array.n - 1}, got ${options.k}`);
  }
  return withCloudFile(array, (path) => {
    const out = runCli(['id', '--input', path, '--format', 'binary', ...optionArgs(options)]);
    return JSON.parse(out).global_id as number;
  });
}

/** Mean curvature proxy of the cloud. */
export function curvature_profile(
  array: BoundArray,
  options: CurvatureOptions = {},
): CurvatureResult {
  if (options.k !== undefined && options.k >= array.n) {
    throw new Error(`k must satisfy 1 <= k <= n-1 = ${array.n - 1}, got ${options.k}`);
  }
  return withCloudFile(array, (path) => {
    const out = runCli(['curvature', '--input', path, '--format', 'binary', ...optionArgs(options)]);
    const doc = JSON.parse(out);
    return { mean: doc.mean_curvature, mean_abs: doc.mean_abs_curvature, skipped: doc.skipped };
  });
}

/** Significant-hole metrics from H1 persistence. */
export function hole_metrics(array: BoundArray, options: HoleOptions = {}): HoleResult {
  return withCloudFile(array, (path) => {
    const out = runCli(['holes', '--input', path, '--format', 'binary', ...optionArgs(options)]);
    const doc = JSON.parse(out);
    return {
      n_holes: doc.n_holes,
      total: doc.total_persistence,
      avg: doc.avg_persistence,
      density: doc.persistence_density,
    };
  });
}

export interface BiasReportResult {
  /** Parsed report document. */
  report: any;
  /** Raw JSON text exactly as the CLI wrote it. */
  raw: string;
}

/** End-to-end bias report over a directory of per-class cloud files. */
export function bias_report(
  embeddingsDir: string,
  accuracyCsv: string,
  options: BiasReportOptions = {},
): BiasReportResult {
  const dir = mkdtempSync(join(tmpdir(), 'pmg-report-'));
  const outPath = join(dir, 'report.json');
  try {
    runCli([
      'report',
      '--embeddings', embeddingsDir,
      '--accuracy', accuracyCsv,
      '--output', outPath,
      ...optionArgs(options),
    ]);
    const raw = readFileSync(outPath, 'utf-8');
    return { report: JSON.parse(raw), raw };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
