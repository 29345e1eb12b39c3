/**
 * Thin typed client for the service endpoints. The fetch implementation
 * is injectable so tests can run against a mock or a spawned server.
 */
import { composeQuery } from "./model.js";
export class ApiError extends Error {
    status;
    code;
    detail;
    constructor(problem) {
        super(`${problem.error}: ${problem.detail}`);
        this.status = problem.status;
        this.code = problem.error;
        this.detail = problem.detail;
    }
}
export class ApiClient {
    base;
    fetchImpl;
    constructor(base = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    async raise(response) {
        let error = "unknown-error";
        let detail = response.statusText;
        try {
            const body = (await response.json());
            error = body.error ?? error;
            detail = body.detail ?? detail;
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError({ status: response.status, error, detail });
    }
    async createAnnotation(doc) {
        const response = await this.fetchImpl(`${this.base}/annotations/`, {
            method: "POST",
            headers: { "Content-Type": 'application/ld+json;profile="http://www.w3.org/ns/anno.jsonld"' },
            body: JSON.stringify(doc),
        });
        if (response.status !== 201)
            await this.raise(response);
        return {
            id: response.headers.get("Location") ?? "",
            version: (response.headers.get("ETag") ?? "").replace(/"/g, ""),
            document: (await response.json()),
        };
    }
    /** Turn a minted annotation IRI into a same-origin request path. */
    pathOf(annotationId) {
        const marker = "/annotations/";
        const at = annotationId.indexOf(marker);
        return at >= 0 ? annotationId.slice(at) : annotationId;
    }
    async getAnnotation(annotationId) {
        const response = await this.fetchImpl(`${this.base}${this.pathOf(annotationId)}`);
        if (!response.ok)
            await this.raise(response);
        return (await response.json());
    }
    async search(target, filters = {}) {
        const params = new URLSearchParams({ target });
        if (filters.lang)
            params.set("lang", filters.lang);
        if (filters.motivation)
            params.set("motivation", filters.motivation);
        if (filters.transformation)
            params.set("transformation", filters.transformation);
        const response = await this.fetchImpl(`${this.base}/search?${params.toString()}`);
        if (!response.ok)
            await this.raise(response);
        const body = (await response.json());
        return body.items;
    }
    async compose(target, audience) {
        const response = await this.fetchImpl(`${this.base}/compose?${composeQuery(target, audience)}`);
        if (!response.ok)
            await this.raise(response);
        return {
            document: await response.text(),
            mediaType: response.headers.get("Content-Type") ?? "text/html",
            provenanceUrl: response.headers.get("X-Renarration-Provenance") ?? "",
        };
    }
    async provenance(url) {
        const response = await this.fetchImpl(`${this.base}${url}`);
        if (!response.ok)
            await this.raise(response);
        return (await response.json());
    }
    async snapshots() {
        const response = await this.fetchImpl(`${this.base}/snapshots`);
        if (!response.ok)
            await this.raise(response);
        const body = (await response.json());
        return body.items;
    }
    snapshotContentUrl(snapshotId) {
        return `${this.base}/snapshots/${snapshotId}/content`;
    }
    async snapshotText(snapshotId) {
        const response = await this.fetchImpl(this.snapshotContentUrl(snapshotId));
        if (!response.ok)
            await this.raise(response);
        return await response.text();
    }
}
