/** Boot a real editor server for the contract tests.
 *
 * Reuses scripts/serve_editor.py from the repository root: it copies the
 * bundled toy workspace into a scratch directory, runs one harvest so the
 * working set has statistics, and serves HTTP on an ephemeral port.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const REPO_ROOT = resolve(
  fileURLToPath(new URL(".", import.meta.url)),
  "..",
  "..",
);

export interface ServerHandle {
  base: string;
  workspace: string;
  stop(): Promise<void>;
}

export async function startServer(timeoutMs = 240_000): Promise<ServerHandle> {
  const scratch = mkdtempSync(join(tmpdir(), "editor-ui-"));
  const proc = spawn(
    "python3",
    [
      "-u",
      join(REPO_ROOT, "scripts", "serve_editor.py"),
      "--scratch",
      scratch,
      "--port",
      "0",
    ],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );

  let out = "";
  let err = "";
  proc.stderr!.on("data", (chunk: Buffer) => {
    err += chunk.toString();
  });

  const base = await new Promise<string>((resolveBase, reject) => {
    const timer = setTimeout(() => {
      proc.kill("SIGKILL");
      reject(new Error(`editor server did not start\n${out}${err}`));
    }, timeoutMs);
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = /at (http:\/\/[\d.]+:\d+)/.exec(out);
      if (m) {
        clearTimeout(timer);
        resolveBase(m[1]!);
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`editor server exited with ${code}\n${out}${err}`));
    });
    proc.on("error", (spawnErr) => {
      clearTimeout(timer);
      reject(spawnErr);
    });
  });

  await waitForHealth(base);
  return { base, workspace: scratch, stop: () => stop(proc, scratch) };
}

async function waitForHealth(base: string): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`no /health response from ${base}`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
}

async function stop(proc: ChildProcess, scratch: string): Promise<void> {
  if (proc.exitCode === null && !proc.killed) {
    proc.kill("SIGINT");
    await new Promise<void>((resolveExit) => {
      const timer = setTimeout(() => {
        proc.kill("SIGKILL");
        resolveExit();
      }, 5_000);
      proc.on("exit", () => {
        clearTimeout(timer);
        resolveExit();
      });
    });
  }
  rmSync(scratch, { recursive: true, force: true });
}
