import { strict as assert } from 'node:assert';
import { test } from 'node:test';
import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { writeMaskPng } from '../src/data';
import { ExperimentMode, runExperiment } from '../src/experiments';

const PYTHON = process.env.ECHOADAPT_PYTHON ?? 'python3';
const SIZE = 64;

function runCli(args: string[]): void {
  const result = spawnSync(PYTHON, ['-m', 'echoadapt', ...args], { encoding: 'utf-8' });
  assert.equal(result.status, 0, `echoadapt ${args[0]}: ${result.stderr || result.stdout}`);
}

function drawCircleMask(size: number, cx: number, cy: number, radius: number): Uint8Array {
  const mask = new Uint8Array(size * size);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      if ((x - cx) ** 2 + (y - cy) ** 2 < radius ** 2) mask[y * size + x] = 1;
    }
  }
  return mask;
}

function copyRole(
  simDir: string,
  ids: string[],
  imagesDir: string,
  labelsDir: string | null,
): void {
  fs.mkdirSync(imagesDir, { recursive: true });
  if (labelsDir) fs.mkdirSync(labelsDir, { recursive: true });
  for (const id of ids) {
    fs.copyFileSync(path.join(simDir, id), path.join(imagesDir, id));
    if (labelsDir) {
      const gtName = id.replace('_bmode.png', '_gt.png');
      fs.copyFileSync(path.join(simDir, gtName), path.join(labelsDir, id));
    }
  }
}

function strictlyDecreasing(values: number[]): boolean {
  return values.every((v, i) => i === 0 || v < values[i - 1]);
}

test('three-protocol smoke on 16 simulated samples', () => {
  const work = fs.mkdtempSync(path.join(os.tmpdir(), 'echoadapt-smoke-'));

  // masks -> simulated samples via the primary CLI
  const maskDir = path.join(work, 'masks');
  fs.mkdirSync(maskDir);
  for (let i = 0; i < 16; i++) {
    const cx = 16 + ((i * 5) % 32);
    const cy = 16 + ((i * 9) % 32);
    const radius = 8 + (i % 6);
    writeMaskPng(
      path.join(maskDir, `shape_${String(i).padStart(2, '0')}.png`),
      SIZE,
      SIZE,
      drawCircleMask(SIZE, cx, cy, radius),
    );
  }
  const simDir = path.join(work, 'sim');
  const psfConfig = path.join(work, 'psf.json');
  fs.writeFileSync(psfConfig, JSON.stringify({ n_scatterers: 20000 }) + '\n');
  runCli([
    'simulate', '--masks', maskDir, '--out', simDir, '--count', '16',
    '--seed', '3', '--size', String(SIZE), '--psf-config', psfConfig,
  ]);

  // 8 / 4 / 4 split of the bmode ids via the primary CLI
  const ids = Array.from({ length: 16 }, (_, i) => `sample_${String(i).padStart(4, '0')}_bmode.png`);
  const idsFile = path.join(work, 'ids.txt');
  fs.writeFileSync(idsFile, ids.join('\n') + '\n');
  const splitDir = path.join(work, 'split');
  runCli([
    'split', '--ids', idsFile, '--out', splitDir,
    '--train', '8', '--val', '4', '--test', '4', '--seed', '1',
  ]);
  const splits = JSON.parse(fs.readFileSync(path.join(splitDir, 'splits.json'), 'utf-8'));
  assert.equal(splits.train.length, 8);
  assert.equal(splits.val.length, 4);
  assert.equal(splits.test.length, 4);

  // role directories; the simulated set stands in for both domains here
  const dataRoot = path.join(work, 'data');
  copyRole(simDir, splits.train, path.join(dataRoot, 'synth', 'images'), path.join(dataRoot, 'synth', 'labels'));
  copyRole(simDir, splits.val, path.join(dataRoot, 'synth_val', 'images'), path.join(dataRoot, 'synth_val', 'labels'));
  copyRole(simDir, splits.train, path.join(dataRoot, 'real_train', 'images'), path.join(dataRoot, 'real_train', 'labels'));
  copyRole(simDir, splits.val, path.join(dataRoot, 'real_val', 'images'), path.join(dataRoot, 'real_val', 'labels'));
  copyRole(simDir, splits.test, path.join(dataRoot, 'real_test', 'images'), path.join(dataRoot, 'real_test', 'labels'));
  copyRole(simDir, [...splits.train, ...splits.val], path.join(dataRoot, 'target_pool'), null);

  const modes: ExperimentMode[] = ['baseline', 'pretrain_no_fda', 'pretrain_fda'];
  for (const mode of modes) {
    const outDir = path.join(work, 'runs', mode);
    const { report, checkpointLogs } = runExperiment({
      mode,
      dataRoot,
      outDir,
      epochs: { baseline: 2, pretrain: 2, finetune: 2 },
      learningRate: 1e-4,
      batchSize: 16,
      weightDecay: 1e-2,
      alpha: 0.014,
      seed: 7,
      model: { depth: 2, baseChannels: 4 },
      pythonBin: PYTHON,
      diceEpsilon: 1e-6,
    });

    assert.ok(fs.existsSync(path.join(outDir, 'checkpoint.json')), `${mode}: checkpoint missing`);
    for (const [phase, entries] of Object.entries(checkpointLogs)) {
      assert.ok(entries.length >= 1, `${mode}/${phase}: no checkpoint saved`);
      assert.ok(
        strictlyDecreasing(entries.map((e) => e.valLoss)),
        `${mode}/${phase}: checkpointed losses not strictly decreasing`,
      );
      for (const entry of entries) assert.ok(Number.isFinite(entry.valLoss));
    }
    if (mode === 'pretrain_fda') {
      assert.ok(fs.existsSync(path.join(outDir, 'adapted_epoch_0')), 'per-epoch adaptation missing');
      assert.ok(fs.existsSync(path.join(outDir, 'adapted_val')), 'fixed-pairing val adaptation missing');
    }

    assert.equal(report.scores.length, 4, `${mode}: expected 4 test scores`);
    for (const score of report.scores) {
      assert.ok(score > 0 && score <= 1, `${mode}: dice ${score} outside (0, 1]`);
    }

    // the emitted report must be parseable by the primary tooling
    const parse = spawnSync(
      PYTHON,
      [
        '-c',
        'import sys; from echoadapt.metrics import EvalReport; ' +
          'r = EvalReport.from_json(open(sys.argv[1]).read()); print(repr(r.mean))',
        path.join(outDir, 'report.json'),
      ],
      { encoding: 'utf-8' },
    );
    assert.equal(parse.status, 0, `${mode}: primary parse failed: ${parse.stderr}`);
    const pythonMean = Number(parse.stdout.trim());
    assert.ok(Math.abs(pythonMean - report.mean) < 1e-9, `${mode}: mean mismatch`);

    // cross-check the written prediction masks through the primary evaluator
    const evalDir = path.join(work, 'runs', `${mode}_eval`);
    runCli([
      'evaluate', '--pred', path.join(outDir, 'predictions'),
      '--gt', path.join(dataRoot, 'real_test', 'labels'), '--out', evalDir,
    ]);
    const crossReport = JSON.parse(fs.readFileSync(path.join(evalDir, 'report.json'), 'utf-8'));
    assert.ok(
      Math.abs(crossReport.mean - report.mean) < 1e-9,
      `${mode}: primary evaluator disagrees (${crossReport.mean} vs ${report.mean})`,
    );
  }

  fs.rmSync(work, { recursive: true, force: true });
});
