/**
 * Reader view: pick a document and an audience profile, fetch the
 * composed rendition, and overlay provenance on substituted fragments.
 *
 * The document shown is exactly the string the compose endpoint
 * returned; marking works on a rendered copy and never rewrites it.
 */
import { ApiError } from "./api.js";
export class ReaderView {
    root;
    api;
    currentDocument = "";
    report = null;
    constructor(root, api) {
        this.root = root;
        this.api = api;
    }
    async render() {
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
      <p class="status" id="reader-status">${sources.length ? "Pick a profile and compose." : "No snapshots yet; ingest a document first."}</p>
      <div class="rendition" id="rendition"></div>
      <aside class="provenance" id="provenance-panel" hidden></aside>
    `;
        const form = this.root.querySelector("#reader-controls");
        form.addEventListener("submit", (event) => {
            event.preventDefault();
            void this.compose(form);
        });
        form.addEventListener("change", () => void this.compose(form));
    }
    profileFrom(form) {
        const data = new FormData(form);
        const languages = String(data.get("lang") ?? "")
            .split(",")
            .map((t) => t.trim())
            .filter(Boolean);
        const profile = { languages };
        const medium = String(data.get("medium") ?? "");
        if (medium)
            profile.medium = medium;
        const level = String(data.get("level") ?? "");
        if (level)
            profile.literacyLevel = Number(level);
        const fallback = String(data.get("fallback") ?? "identity");
        profile.fallback = fallback;
        return profile;
    }
    async compose(form) {
        const status = this.root.querySelector("#reader-status");
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
        }
        catch (problem) {
            status.textContent =
                problem instanceof ApiError && problem.code === "no-snapshot"
                    ? "No snapshot of that document yet - ingest it first."
                    : `Compose failed: ${problem.message}`;
        }
    }
    show(mediaType) {
        const container = this.root.querySelector("#rendition");
        if (mediaType.startsWith("text/html")) {
            // a rendered copy; this.currentDocument stays byte-for-byte as fetched
            container.innerHTML = this.currentDocument;
            for (const el of container.querySelectorAll("[data-renarration]")) {
                el.classList.add("substituted");
                el.addEventListener("click", () => this.showProvenance(el.dataset.renarration ?? ""));
            }
        }
        else {
            container.textContent = "";
            const pre = document.createElement("pre");
            pre.textContent = this.currentDocument;
            container.appendChild(pre);
        }
    }
    showProvenance(chosen) {
        const panel = this.root.querySelector("#provenance-panel");
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
    get documentText() {
        return this.currentDocument;
    }
}
function escapeHtml(text) {
    return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}
function escapeAttr(text) {
    return escapeHtml(text);
}
