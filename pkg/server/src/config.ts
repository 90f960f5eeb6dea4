import { parseArgs } from "node:util";

/**
 * Server configuration: bind address, one model identifier per scoring
 * role, a device selector, and the per-request batch cap.  A role whose
 * model is "none" stays unconfigured and its endpoint answers 501.
 *
 * Model identifier grammar (the built-in deterministic providers):
 *   embed  "hash-<dim>"        hashed signed bag-of-words, unit-normalized
 *   score  "cosine-<dim>"      embedding cosine between query and document
 *   nsp    "nsp-cosine-<dim>"  order-sensitive embedding cosine in [0,1]
 *   ppl    "bigram"            Laplace-smoothed bigram language model
 */
export interface ServerConfig {
  host: string;
  port: number;
  embedModel: string;
  scoreModel: string;
  nspModel: string;
  pplModel: string;
  device: string;
  maxBatch: number;
}

export const DEFAULT_CONFIG: ServerConfig = {
  host: "127.0.0.1",
  port: 8900,
  embedModel: "hash-256",
  scoreModel: "cosine-256",
  nspModel: "nsp-cosine-256",
  pplModel: "bigram",
  device: "cpu",
  maxBatch: 1024,
};

export class ConfigError extends Error {}

function parsePositiveInt(name: string, raw: string): number {
  const value = Number(raw);
  if (!Number.isInteger(value) || value < 1) {
    throw new ConfigError(`${name} must be a positive integer, got ${raw}`);
  }
  return value;
}

/** Dimension encoded in a model identifier like "hash-256". */
export function modelDim(modelId: string, prefix: string): number {
  const match = modelId.match(new RegExp(`^${prefix}-(\\d+)$`));
  if (match === null) {
    throw new ConfigError(`model id ${modelId} does not match ${prefix}-<dim>`);
  }
  const dim = Number(match[1]);
  if (dim < 2) {
    throw new ConfigError(`model id ${modelId} needs dim >= 2`);
  }
  return dim;
}

export function validateConfig(config: ServerConfig): ServerConfig {
  if (config.port < 0 || config.port > 65535) {
    throw new ConfigError(`port out of range: ${config.port}`);
  }
  if (config.maxBatch < 1) {
    throw new ConfigError(`max batch must be >= 1: ${config.maxBatch}`);
  }
  if (config.embedModel !== "none") modelDim(config.embedModel, "hash");
  if (config.scoreModel !== "none") modelDim(config.scoreModel, "cosine");
  if (config.nspModel !== "none") modelDim(config.nspModel, "nsp-cosine");
  if (config.pplModel !== "none" && config.pplModel !== "bigram") {
    throw new ConfigError(`unknown perplexity model: ${config.pplModel}`);
  }
  return config;
}

/** Flags override environment variables override built-in defaults. */
export function loadConfig(
  argv: string[] = [],
  env: NodeJS.ProcessEnv = process.env,
): ServerConfig {
  type Flags = {
    host?: string;
    port?: string;
    "embed-model"?: string;
    "score-model"?: string;
    "nsp-model"?: string;
    "ppl-model"?: string;
    device?: string;
    "max-batch"?: string;
  };
  let values: Flags;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        host: { type: "string" },
        port: { type: "string" },
        "embed-model": { type: "string" },
        "score-model": { type: "string" },
        "nsp-model": { type: "string" },
        "ppl-model": { type: "string" },
        device: { type: "string" },
        "max-batch": { type: "string" },
      },
    }));
  } catch (err) {
    throw new ConfigError(err instanceof Error ? err.message : String(err));
  }
  const pick = (flag: string | undefined, envName: string, fallback: string): string =>
    flag ?? env[envName] ?? fallback;
  const config: ServerConfig = {
    host: pick(values.host, "EMPRA_HOST", DEFAULT_CONFIG.host),
    port: parsePositiveInt(
      "port",
      pick(values.port, "EMPRA_PORT", String(DEFAULT_CONFIG.port)),
    ),
    embedModel: pick(values["embed-model"], "EMPRA_EMBED_MODEL", DEFAULT_CONFIG.embedModel),
    scoreModel: pick(values["score-model"], "EMPRA_SCORE_MODEL", DEFAULT_CONFIG.scoreModel),
    nspModel: pick(values["nsp-model"], "EMPRA_NSP_MODEL", DEFAULT_CONFIG.nspModel),
    pplModel: pick(values["ppl-model"], "EMPRA_PPL_MODEL", DEFAULT_CONFIG.pplModel),
    device: pick(values.device, "EMPRA_DEVICE", DEFAULT_CONFIG.device),
    maxBatch: parsePositiveInt(
      "max batch",
      pick(values["max-batch"], "EMPRA_MAX_BATCH", String(DEFAULT_CONFIG.maxBatch)),
    ),
  };
  return validateConfig(config);
}
