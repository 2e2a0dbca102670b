/**
 * entscore-node
 *
 * Thin Node wrapper around the entscore command-line engine. All scoring is
 * delegated to the CLI, so results are identical to what `entscore score`
 * prints; this module only manages temp files, process invocation, and
 * error translation.
 */
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Embedding backend selection, mirroring the CLI's --encoder flags. */
export type EncoderConfig =
  | { kind: "hash"; dimension?: number }
  | { kind: "table"; tablePath: string };

export interface SessionOptions {
  /** Path to a params JSON file; engine defaults apply when omitted. */
  paramsPath?: string;
  /** Path to the gazetteer TSV (required for scoring raw text). */
  gazetteerPath: string;
  /** Embedding backend; defaults to the 256-dimension hash encoder. */
  encoder?: EncoderConfig;
  /** Optional negation lexicon JSON. */
  negationPath?: string;
  /**
   * Engine command. Defaults to the ENTSCORE_CLI environment variable
   * (whitespace-split), falling back to the installed `entscore` script.
   */
  cli?: string[];
}

export interface ScoreBreakdown {
  ratescore: number;
  forward: number;
  backward: number;
}

/** The five entity categories, in the order that indexes the affinity matrix. */
export const TYPE_ORDER = [
  "Anatomy",
  "Abnormality",
  "Disease",
  "NonAbnormality",
  "NonDisease",
] as const;

export interface ScoreParams {
  typeOrder: string[];
  W: number[][];
  p: number;
}

export class EngineError extends Error {
  constructor(message: string, readonly exitCode: number | null = null) {
    super(message);
    this.name = "EngineError";
  }
}

/** Read and validate a params JSON file without invoking the engine. */
export function loadParams(path: string): ScoreParams {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new EngineError(`cannot read params file ${path}: ${(err as Error).message}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch (err) {
    throw new EngineError(`${path}: invalid JSON: ${(err as Error).message}`);
  }
  const record = doc as Record<string, unknown>;
  const typeOrder = record["type_order"];
  const W = record["W"];
  const p = record["p"];
  if (
    !Array.isArray(typeOrder) ||
    typeOrder.length !== TYPE_ORDER.length ||
    typeOrder.some((t, i) => t !== TYPE_ORDER[i])
  ) {
    throw new EngineError(`${path}: type_order must be ${JSON.stringify(TYPE_ORDER)}`);
  }
  if (
    !Array.isArray(W) ||
    W.length !== 5 ||
    W.some((row) => !Array.isArray(row) || row.length !== 5 || row.some((v) => typeof v !== "number"))
  ) {
    throw new EngineError(`${path}: W must be a 5x5 numeric matrix`);
  }
  if (typeof p !== "number" || p < 0 || p > 1) {
    throw new EngineError(`${path}: p must be a number in [0, 1]`);
  }
  return { typeOrder: typeOrder as string[], W: W as number[][], p };
}

function resolveCli(explicit?: string[]): string[] {
  if (explicit && explicit.length > 0) return explicit;
  const env = process.env["ENTSCORE_CLI"];
  if (env && env.trim()) return env.trim().split(/\s+/);
  return ["entscore"];
}

/**
 * A configured scoring session. Resource paths are validated once and every
 * scoring call reuses them. Sessions are single-owner: use one session per
 * thread of control.
 */
export class ScoreSession {
  private readonly cli: string[];
  private readonly baseArgs: string[];

  constructor(options: SessionOptions) {
    if (!options.gazetteerPath) {
      throw new EngineError("gazetteerPath is required");
    }
    if (options.paramsPath) {
      loadParams(options.paramsPath); // fail fast on malformed params
    }
    this.cli = resolveCli(options.cli);
    const encoder = options.encoder ?? { kind: "hash" };
    const args = ["--gazetteer", options.gazetteerPath];
    if (options.paramsPath) args.push("--params", options.paramsPath);
    if (options.negationPath) args.push("--negation", options.negationPath);
    if (encoder.kind === "table") {
      args.push("--encoder", "table", "--table", encoder.tablePath);
    } else {
      args.push("--encoder", "hash");
      if (encoder.dimension !== undefined) {
        args.push("--dimension", String(encoder.dimension));
      }
    }
    this.baseArgs = args;
  }

  /** Score one candidate report against one reference report. */
  score(reference: string, candidate: string): number {
    return this.scoreDetailed(reference, candidate).ratescore;
  }

  /** Score one pair and return the directional components as well. */
  scoreDetailed(reference: string, candidate: string): ScoreBreakdown {
    const [row] = this.run([[reference, candidate]]);
    return row;
  }

  /** Score many pairs in one engine invocation; output order matches input order. */
  scoreCorpus(pairs: Array<[reference: string, candidate: string]>): number[] {
    if (pairs.length === 0) return [];
    return this.run(pairs).map((row) => row.ratescore);
  }

  private run(pairs: Array<[string, string]>): ScoreBreakdown[] {
    for (const [reference, candidate] of pairs) {
      if (reference.includes("\n") || candidate.includes("\n")) {
        throw new EngineError(
          "reports must be single-line texts; the score interface pairs files line by line"
        );
      }
    }
    const workDir = mkdtempSync(join(tmpdir(), "entscore-"));
    try {
      const refPath = join(workDir, "refs.txt");
      const candPath = join(workDir, "cands.txt");
      const outPath = join(workDir, "scores.jsonl");
      writeFileSync(refPath, pairs.map(([r]) => r).join("\n") + "\n", "utf-8");
      writeFileSync(candPath, pairs.map(([, c]) => c).join("\n") + "\n", "utf-8");

      const [command, ...prefix] = this.cli;
      const args = [
        ...prefix,
        "score",
        "--ref",
        refPath,
        "--cand",
        candPath,
        ...this.baseArgs,
        "--output",
        outPath,
      ];
      const result = spawnSync(command, args, { encoding: "utf-8" });
      if (result.error) {
        throw new EngineError(`failed to launch engine '${command}': ${result.error.message}`);
      }
      if (result.status !== 0) {
        const detail = (result.stderr || result.stdout || "").trim();
        throw new EngineError(detail || `engine exited with code ${result.status}`, result.status);
      }

      const rows = readFileSync(outPath, "utf-8")
        .split("\n")
        .filter((line) => line.trim().length > 0)
        .map((line) => JSON.parse(line) as Record<string, number>);
      if (rows.length !== pairs.length) {
        throw new EngineError(
          `engine returned ${rows.length} scores for ${pairs.length} pairs`
        );
      }
      return rows.map((row) => ({
        ratescore: row["ratescore"],
        forward: row["S_forward"],
        backward: row["S_backward"],
      }));
    } finally {
      rmSync(workDir, { recursive: true, force: true });
    }
  }
}

/** One-shot helper: score a single pair without keeping a session around. */
export function score(
  reference: string,
  candidate: string,
  options: SessionOptions
): number {
  return new ScoreSession(options).score(reference, candidate);
}

/** One-shot helper: score a list of pairs in one engine invocation. */
export function scoreCorpus(
  pairs: Array<[reference: string, candidate: string]>,
  options: SessionOptions
): number[] {
  return new ScoreSession(options).scoreCorpus(pairs);
}
