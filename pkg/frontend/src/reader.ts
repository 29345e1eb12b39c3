/**
 * Reader view: pick a document and an audience profile, fetch the
 * composed rendition, and overlay provenance on substituted fragments.
 *
 * The document shown is exactly the string the compose endpoint
 * returned; marking works on a rendered copy and never rewrites it.
 */

import { ApiClient, ApiError, ProvenanceReport } from "./api.js";
import type { AudienceQuery, Medium } from "./model.js";

export class ReaderView {
  private root: HTMLElement;
  private api: ApiClient;
  private currentDocument = "";
  private report: ProvenanceReport | null = null;

  constructor(root: HTMLElement, api: ApiClient) {
    this.root = root;
    this.api = api;
  }

  async render(): Promise<void> {
    const snapshots = await this.api.snapshots();
    const sources = [...new Set(snapshots.map((s) => s.source))];
    this.root.innerHTML = `
      <form class="controls" id="reader-controls">
        <label>Document
          <select name="target">${sources
            .map((s) => `<option value="${escapeAttr(s)}">${escapeHtml(s)}</option>`)
            .join("")}</select>
        </label>
        <label>Languages (preferred first)
          <input name="lang" value="kn,en" placeholder="kn,en">
        </label>
        <label>Medium
          <select name="medium">
            <option value="">any</option>
            <option>text</option><option>audio</option>
            <option>video</option><option>image</option>
          </select>
        </label>
        <label>Literacy level
          <input name="level" type="number" min="1" max="5" placeholder="-">
        </label>
        <label>Fallback
          <select name="fallback"><option>identity</option><option>tagging</option></select>
        </label>
        <button type="submit">Compose</button>
      </form>
      <p class="status" id="reader-status">${
        sources.length ? "Pick a profile and compose." : "No snapshots yet; ingest a document first."
      }</p>
      <div class="rendition" id="rendition"></div>
      <aside class="provenance" id="provenance-panel" hidden></aside>
    `;
    const form = this.root.querySelector<HTMLFormElement>("#reader-controls")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.compose(form);
    });
    form.addEventListener("change", () => void this.compose(form));
  }

  private profileFrom(form: HTMLFormElement): AudienceQuery {
    const data = new FormData(form);
    const languages = String(data.get("lang") ?? "")
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);
    const profile: AudienceQuery = { languages };
    const medium = String(data.get("medium") ?? "");
    if (medium) profile.medium = medium as Medium;
    const level = String(data.get("level") ?? "");
    if (level) profile.literacyLevel = Number(level);
    const fallback = String(data.get("fallback") ?? "identity");
    profile.fallback = fallback as "identity" | "tagging";
    return profile;
  }

  private async compose(form: HTMLFormElement): Promise<void> {
    const status = this.root.querySelector<HTMLElement>("#reader-status")!;
    const target = String(new FormData(form).get("target") ?? "");
    try {
      const result = await this.api.compose(target, this.profileFrom(form));
      this.currentDocument = result.document;
      this.report = result.provenanceUrl
        ? await this.api.provenance(result.provenanceUrl)
        : null;
      this.show(result.mediaType);
      const n = this.report?.substitutions.length ?? 0;
      status.textContent = n
        ? `${n} fragment${n === 1 ? "" : "s"} renarrated; click a highlight for provenance.`
        : "No fragments were renarrated for this profile.";
    } catch (problem) {
      status.textContent =
        problem instanceof ApiError && problem.code === "no-snapshot"
          ? "No snapshot of that document yet - ingest it first."
          : `Compose failed: ${(problem as Error).message}`;
    }
  }

  private show(mediaType: string): void {
    const container = this.root.querySelector<HTMLElement>("#rendition")!;
    if (mediaType.startsWith("text/html")) {
      // a rendered copy; this.currentDocument stays byte-for-byte as fetched
      container.innerHTML = this.currentDocument;
      for (const el of container.querySelectorAll<HTMLElement>("[data-renarration]")) {
        el.classList.add("substituted");
        el.addEventListener("click", () => this.showProvenance(el.dataset.renarration ?? ""));
      }
    } else {
      container.textContent = "";
      const pre = document.createElement("pre");
      pre.textContent = this.currentDocument;
      container.appendChild(pre);
    }
  }

  private showProvenance(chosen: string): void {
    const panel = this.root.querySelector<HTMLElement>("#provenance-panel")!;
    const entry = this.report?.substitutions.find((s) => s.chosen === chosen);
    if (!entry) {
      panel.hidden = true;
      return;
    }
    panel.hidden = false;
    panel.innerHTML = `
      <h3>Why this fragment</h3>
      <dl>
        <dt>Contribution</dt><dd>${escapeHtml(entry.chosen)}</dd>
        <dt>Score</dt><dd>${entry.score}</dd>
        <dt>Anchoring</dt><dd>${escapeHtml(entry.method)}
          (confidence ${entry.confidence.toFixed(2)})</dd>
        <dt>Fragment</dt><dd>chars ${entry.fragment.start ?? "?"}-${entry.fragment.end ?? "?"}</dd>
      </dl>
    `;
  }

  /** The exact document string last fetched; what agreement checks compare. */
  get documentText(): string {
    return this.currentDocument;
  }
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function escapeAttr(text: string): string {
  return escapeHtml(text);
}
