import * as fs from 'fs';

/** Evaluation report in the primary toolkit's report.json schema. */
export interface EvalReport {
  sample_ids: string[];
  scores: number[];
  mean: number;
  median: number;
  std: number;
  epsilon: number;
}

export function buildReport(sampleIds: string[], scores: number[], epsilon: number): EvalReport {
  if (sampleIds.length !== scores.length) {
    throw new Error(`ids/scores length mismatch: ${sampleIds.length} vs ${scores.length}`);
  }
  const n = scores.length;
  const mean = scores.reduce((a, b) => a + b, 0) / n;
  const sorted = [...scores].sort((a, b) => a - b);
  const median = n % 2 === 1 ? sorted[(n - 1) / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const variance = scores.reduce((a, b) => a + (b - mean) * (b - mean), 0) / n;
  return {
    sample_ids: [...sampleIds],
    scores: [...scores],
    mean,
    median,
    std: Math.sqrt(variance),
    epsilon,
  };
}

export function writeReport(path: string, report: EvalReport): void {
  const ordered: Record<string, unknown> = {};
  for (const key of Object.keys(report).sort()) {
    ordered[key] = (report as unknown as Record<string, unknown>)[key];
  }
  fs.writeFileSync(path, JSON.stringify(ordered, null, 2) + '\n');
}

export function readReport(path: string): EvalReport {
  const raw = JSON.parse(fs.readFileSync(path, 'utf-8'));
  return buildReport(raw.sample_ids, raw.scores, raw.epsilon);
}
