/** Spawns the real API server with scripted fixtures for end-to-end tests. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

const REPO_ROOT = resolve(__dirname, "..", "..");

export interface FixtureServer {
  baseUrl: string;
  stop: () => void;
}

export async function startFixtureServer(port: number): Promise<FixtureServer> {
  const configDir = mkdtempSync(join(tmpdir(), "capaplan-ui-"));
  const configPath = join(configDir, "config.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      model: join(REPO_ROOT, "fixtures", "depth_station.json"),
      provider: {
        kind: "scripted",
        script: join(REPO_ROOT, "scripts", "ap_two_iteration.json"),
      },
      max_horizon: 2,
      max_iterations: 5,
    }),
  );
  const child: ChildProcess = spawn(
    "python3",
    [
      "-c",
      "import sys, uvicorn; from capaplan.service import app_from_config; " +
        "uvicorn.run(app_from_config(sys.argv[1]), host='127.0.0.1', port=int(sys.argv[2]), log_level='warning')",
      configPath,
      String(port),
    ],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${baseUrl}/model`);
      if (response.ok) return { baseUrl, stop: () => child.kill() };
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  child.kill();
  throw new Error("fixture server did not start");
}
