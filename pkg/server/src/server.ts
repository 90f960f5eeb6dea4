/**
 * HTTP scoring sidecar.
 *
 * Exposes embedding, relevance, next-sentence, and perplexity scoring
 * over a small JSON protocol.  Every error response carries a JSON body
 * of the form {"error": <text>}: 400 for malformed requests, 413 for
 * oversized batches, 501 for endpoints whose model is configured off.
 */

import express, { type Express, type NextFunction, type Request, type Response } from "express";
import { z } from "zod";

import { modelDim, type ServerConfig } from "./config.js";
import { BigramPerplexity, CosineNsp, CosineRelevance, HashEmbedder } from "./providers.js";

const embedRequest = z.object({
  texts: z.array(z.string().min(1)),
});

const scoreRequest = z.object({
  query: z.string(),
  docs: z.array(z.string()),
});

const nspRequest = z.object({
  pairs: z.array(z.tuple([z.string(), z.string()])),
});

const perplexityRequest = z.object({
  texts: z.array(z.string()),
});

function sendError(res: Response, status: number, message: string): void {
  res.status(status).json({ error: message });
}

function parseBody<T>(schema: z.ZodType<T>, req: Request, res: Response): T | null {
  const result = schema.safeParse(req.body);
  if (!result.success) {
    const issue = result.error.issues[0];
    const path = issue.path.length > 0 ? ` at ${issue.path.join(".")}` : "";
    sendError(res, 400, `malformed request${path}: ${issue.message}`);
    return null;
  }
  return result.data;
}

function checkBatch(res: Response, size: number, maxBatch: number): boolean {
  if (size > maxBatch) {
    sendError(res, 413, `batch of ${size} exceeds the limit of ${maxBatch}`);
    return false;
  }
  return true;
}

export function createApp(config: ServerConfig): Express {
  const embedder =
    config.embedModel === "none"
      ? null
      : new HashEmbedder(modelDim(config.embedModel, "hash"), 1n);
  const relevance =
    config.scoreModel === "none"
      ? null
      : new CosineRelevance(modelDim(config.scoreModel, "cosine"));
  const nsp =
    config.nspModel === "none" ? null : new CosineNsp(modelDim(config.nspModel, "nsp-cosine"));
  const perplexity = config.pplModel === "none" ? null : new BigramPerplexity();

  const endpoints: string[] = [];
  if (embedder) endpoints.push("embed");
  if (relevance) endpoints.push("score");
  if (nsp) endpoints.push("nsp");
  if (perplexity) endpoints.push("perplexity");

  const app = express();
  app.use(express.json({ limit: "16mb" }));

  app.get("/healthz", (_req, res) => {
    res.json({ status: "ok", endpoints });
  });

  app.post("/embed", (req, res) => {
    if (!embedder) {
      return sendError(res, 501, "no embedding model is configured");
    }
    const body = parseBody(embedRequest, req, res);
    if (body === null) return;
    if (!checkBatch(res, body.texts.length, config.maxBatch)) return;
    res.json({ vectors: embedder.embed(body.texts), dim: embedder.dim });
  });

  app.post("/score", (req, res) => {
    if (!relevance) {
      return sendError(res, 501, "no relevance model is configured");
    }
    const body = parseBody(scoreRequest, req, res);
    if (body === null) return;
    if (!checkBatch(res, body.docs.length, config.maxBatch)) return;
    res.json({ scores: relevance.score(body.query, body.docs) });
  });

  app.post("/nsp", (req, res) => {
    if (!nsp) {
      return sendError(res, 501, "no next-sentence model is configured");
    }
    const body = parseBody(nspRequest, req, res);
    if (body === null) return;
    if (!checkBatch(res, body.pairs.length, config.maxBatch)) return;
    res.json({ probs: nsp.probNext(body.pairs as Array<[string, string]>) });
  });

  app.post("/perplexity", (req, res) => {
    if (!perplexity) {
      return sendError(res, 501, "no perplexity model is configured");
    }
    const body = parseBody(perplexityRequest, req, res);
    if (body === null) return;
    if (!checkBatch(res, body.texts.length, config.maxBatch)) return;
    const ppl = perplexity.perplexity(body.texts);
    const errors = ppl
      .map((value, index) => ({ value, index }))
      .filter(({ value }) => value === null)
      .map(({ index }) => ({ index, error: "text has fewer than two tokens" }));
    res.json(errors.length > 0 ? { ppl, errors } : { ppl });
  });

  app.use((req, res) => {
    sendError(res, 404, `no such endpoint: ${req.method} ${req.path}`);
  });

  app.use((err: Error, _req: Request, res: Response, _next: NextFunction) => {
    if (err instanceof SyntaxError && "body" in err) {
      return sendError(res, 400, "request body is not valid JSON");
    }
    sendError(res, 500, err.message);
  });

  return app;
}
