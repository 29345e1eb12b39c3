/**
 * Thin typed client for the service endpoints. The fetch implementation
 * is injectable so tests can run against a mock or a spawned server.
 */

import type { AnnotationDocument, AudienceQuery } from "./model.js";
import { composeQuery } from "./model.js";

export interface ServerError {
  status: number;
  error: string;
  detail: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(problem: ServerError) {
    super(`${problem.error}: ${problem.detail}`);
    this.status = problem.status;
    this.code = problem.error;
    this.detail = problem.detail;
  }
}

export interface CreatedAnnotation {
  id: string;
  version: string;
  document: AnnotationDocument;
}

export interface ComposeResult {
  document: string;
  mediaType: string;
  provenanceUrl: string;
}

export interface ProvenanceEntry {
  fragment: { start?: number; end?: number; byteStart?: number; byteEnd?: number };
  chosen: string;
  score: number;
  method: string;
  confidence: number;
}

export interface ProvenanceReport {
  source: string;
  profile: { languages: string[]; medium?: string; literacyLevel?: number };
  substitutions: ProvenanceEntry[];
  orphaned: { annotation: string; reason: string }[];
  orphanedCount: number;
  droppedOverlapCount: number;
}

export interface SnapshotInfo {
  id: string;
  source: string;
  mediaType: string;
  retrievedAt: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async raise(response: Response): Promise<never> {
    let error = "unknown-error";
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string; detail?: string };
      error = body.error ?? error;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError({ status: response.status, error, detail });
  }

  async createAnnotation(doc: AnnotationDocument): Promise<CreatedAnnotation> {
    const response = await this.fetchImpl(`${this.base}/annotations/`, {
      method: "POST",
      headers: { "Content-Type": 'application/ld+json;profile="http://www.w3.org/ns/anno.jsonld"' },
      body: JSON.stringify(doc),
    });
    if (response.status !== 201) await this.raise(response);
    return {
      id: response.headers.get("Location") ?? "",
      version: (response.headers.get("ETag") ?? "").replace(/"/g, ""),
      document: (await response.json()) as AnnotationDocument,
    };
  }

  /** Turn a minted annotation IRI into a same-origin request path. */
  pathOf(annotationId: string): string {
    const marker = "/annotations/";
    const at = annotationId.indexOf(marker);
    return at >= 0 ? annotationId.slice(at) : annotationId;
  }

  async getAnnotation(annotationId: string): Promise<AnnotationDocument> {
    const response = await this.fetchImpl(`${this.base}${this.pathOf(annotationId)}`);
    if (!response.ok) await this.raise(response);
    return (await response.json()) as AnnotationDocument;
  }

  async search(
    target: string,
    filters: { lang?: string; motivation?: string; transformation?: string } = {},
  ): Promise<AnnotationDocument[]> {
    const params = new URLSearchParams({ target });
    if (filters.lang) params.set("lang", filters.lang);
    if (filters.motivation) params.set("motivation", filters.motivation);
    if (filters.transformation) params.set("transformation", filters.transformation);
    const response = await this.fetchImpl(`${this.base}/search?${params.toString()}`);
    if (!response.ok) await this.raise(response);
    const body = (await response.json()) as { items: AnnotationDocument[] };
    return body.items;
  }

  async compose(target: string, audience: AudienceQuery): Promise<ComposeResult> {
    const response = await this.fetchImpl(
      `${this.base}/compose?${composeQuery(target, audience)}`,
    );
    if (!response.ok) await this.raise(response);
    return {
      document: await response.text(),
      mediaType: response.headers.get("Content-Type") ?? "text/html",
      provenanceUrl: response.headers.get("X-Renarration-Provenance") ?? "",
    };
  }

  async provenance(url: string): Promise<ProvenanceReport> {
    const response = await this.fetchImpl(`${this.base}${url}`);
    if (!response.ok) await this.raise(response);
    return (await response.json()) as ProvenanceReport;
  }

  async snapshots(): Promise<SnapshotInfo[]> {
    const response = await this.fetchImpl(`${this.base}/snapshots`);
    if (!response.ok) await this.raise(response);
    const body = (await response.json()) as { items: SnapshotInfo[] };
    return body.items;
  }

  snapshotContentUrl(snapshotId: string): string {
    return `${this.base}/snapshots/${snapshotId}/content`;
  }

  async snapshotText(snapshotId: string): Promise<string> {
    const response = await this.fetchImpl(this.snapshotContentUrl(snapshotId));
    if (!response.ok) await this.raise(response);
    return await response.text();
  }
}
