import { spawn, spawnSync } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface Gateway {
  baseUrl: string;
  stop(): void;
}

export const sleep = (ms: number): Promise<void> =>
  new Promise((resolve) => setTimeout(resolve, ms));

export async function waitFor(
  condition: () => boolean,
  timeoutMs = 20000,
  label = 'condition',
): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${label}`);
    }
    await sleep(10);
  }
}

/**
 * Boot the real gateway over the bundled demo dataset on a free port.
 * Fixture generation and the server run out of a throwaway directory that
 * stop() removes again.
 */
export async function startGateway(): Promise<Gateway> {
  const dir = mkdtempSync(join(tmpdir(), 'vegscan-console-'));
  const dataDir = join(dir, 'data');
  const made = spawnSync('python3', ['-m', 'vegscan.cli', 'make-fixtures', dataDir], {
    encoding: 'utf8',
  });
  if (made.status !== 0) {
    rmSync(dir, { recursive: true, force: true });
    throw new Error(`fixture generation failed: ${made.stderr}`);
  }

  let lastStderr = '';
  for (let attempt = 0; attempt < 5; attempt++) {
    const port = 21000 + Math.floor(Math.random() * 8000);
    const proc = spawn(
      'python3',
      [
        '-m',
        'vegscan.cli',
        'serve',
        '--manifest',
        join(dataDir, 'manifest.json'),
        '--admin',
        join(dataDir, 'admin.geojson'),
        '--protected-areas',
        join(dataDir, 'protected_areas.geojson'),
        '--cache-dir',
        join(dir, 'cache'),
        '--port',
        String(port),
      ],
      { stdio: ['ignore', 'ignore', 'pipe'] },
    );
    let stderr = '';
    proc.stderr?.on('data', (chunk: Buffer) => {
      stderr = (stderr + chunk.toString()).slice(-4000);
    });
    let exited = false;
    proc.on('exit', () => {
      exited = true;
    });

    const baseUrl = `http://127.0.0.1:${port}`;
    for (let i = 0; i < 200 && !exited; i++) {
      try {
        const res = await fetch(`${baseUrl}/sensors`);
        if (res.ok) {
          await res.arrayBuffer();
          return {
            baseUrl,
            stop() {
              proc.kill('SIGTERM');
              rmSync(dir, { recursive: true, force: true });
            },
          };
        }
        await res.arrayBuffer();
      } catch {
        // not listening yet
      }
      await sleep(100);
    }
    proc.kill('SIGTERM');
    lastStderr = stderr;
  }
  rmSync(dir, { recursive: true, force: true });
  throw new Error(`gateway never came up; last stderr:\n${lastStderr}`);
}
