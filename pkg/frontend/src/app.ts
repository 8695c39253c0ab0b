// View controllers and page wiring.  Polling is plain setInterval with an
// in-flight guard; a stop click refreshes immediately so the row flips
// within one poll period.

import { ApiClient, ApiError } from "./api.js";
import type { ScanResponse } from "./api.js";
import { renderDeauthView, renderEnrollResult, renderScanView } from "./views.js";

export const POLL_INTERVAL_MS = 2000;

export class ScanController {
    private inFlight = false;

    constructor(
        private container: HTMLElement,
        private api: ApiClient,
        private sources: () => string[],
    ) {
        this.container.innerHTML = renderScanView(null);
    }

    async scan(): Promise<void> {
        if (this.inFlight) {
            return; // one scan at a time per view
        }
        this.inFlight = true;
        this.container.innerHTML = renderScanView(null, true);
        try {
            const response: ScanResponse = await this.api.scan(this.sources(), {});
            this.container.innerHTML = renderScanView(response);
        } catch (err) {
            this.container.innerHTML = renderScanView({
                request_id: "",
                status: "error",
                error: err instanceof Error ? err.message : String(err),
            });
        } finally {
            this.inFlight = false;
        }
    }
}

export class DeauthController {
    private timer: ReturnType<typeof setInterval> | null = null;
    private inFlight = false;

    constructor(
        private container: HTMLElement,
        private api: ApiClient,
        private intervalMs: number = POLL_INTERVAL_MS,
    ) {
        this.container.addEventListener("click", (event) => {
            const target = event.target as HTMLElement | null;
            const bssid = target?.getAttribute?.("data-stop");
            if (bssid) {
                void this.stop(bssid);
            }
        });
    }

    start(): void {
        if (this.timer !== null) {
            return;
        }
        void this.refresh();
        this.timer = setInterval(() => void this.refresh(), this.intervalMs);
    }

    halt(): void {
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }

    async refresh(): Promise<void> {
        if (this.inFlight) {
            return; // skip the tick rather than stack requests
        }
        this.inFlight = true;
        try {
            const campaigns = await this.api.deauthCampaigns();
            this.container.innerHTML = renderDeauthView(campaigns);
        } catch {
            // leave the last good view in place; next tick retries
        } finally {
            this.inFlight = false;
        }
    }

    async stop(bssid: string): Promise<void> {
        try {
            await this.api.stopDeauth(bssid);
        } catch {
            // auth errors surface via the enroll/token flow; keep polling
        }
        this.inFlight = false;
        await this.refresh();
    }
}

export class EnrollController {
    constructor(
        private resultContainer: HTMLElement,
        private api: ApiClient,
        private confirmReplace: (message: string) => boolean = (m) => globalThis.confirm(m),
    ) {}

    async enroll(label: string, captureB64: string): Promise<void> {
        try {
            // Re-enrolling a BSSID replaces its stored identity; preview the
            // capture first and make the operator say so out loud.
            const preview = await this.api.enroll(label, captureB64, true);
            const known = new Set((await this.api.fingerprints()).map((r) => r.bssid));
            const replaced = preview.filter((r) => known.has(r.bssid));
            if (replaced.length > 0) {
                const list = replaced.map((r) => r.bssid).join(", ");
                if (!this.confirmReplace(`Replace the stored identity of ${list}?`)) {
                    this.resultContainer.innerHTML = renderEnrollResult(null, "cancelled");
                    return;
                }
            }
            const records = await this.api.enroll(label, captureB64);
            this.resultContainer.innerHTML = renderEnrollResult(records, null);
        } catch (err) {
            const message =
                err instanceof ApiError && err.status === 401
                    ? "admin token missing or wrong"
                    : err instanceof Error
                      ? err.message
                      : String(err);
            this.resultContainer.innerHTML = renderEnrollResult(null, message);
        }
    }
}

function fileToBase64(file: File): Promise<string> {
    return new Promise((resolve, reject) => {
        const reader = new FileReader();
        reader.onerror = () => reject(reader.error);
        reader.onload = () => {
            const url = reader.result as string; // data:...;base64,xxxx
            resolve(url.slice(url.indexOf(",") + 1));
        };
        reader.readAsDataURL(file);
    });
}

export function mountApp(doc: Document, api: ApiClient): void {
    const tokenInput = doc.getElementById("admin-token") as HTMLInputElement;
    tokenInput.value = localStorage.getItem("twinsentry-token") ?? "";
    api.setToken(tokenInput.value);
    tokenInput.addEventListener("input", () => {
        api.setToken(tokenInput.value);
        localStorage.setItem("twinsentry-token", tokenInput.value);
    });

    const sourcesInput = doc.getElementById("scan-sources") as HTMLInputElement;
    const scan = new ScanController(
        doc.getElementById("scan-view") as HTMLElement,
        api,
        () =>
            sourcesInput.value
                .split(",")
                .map((s) => s.trim())
                .filter((s) => s.length > 0),
    );
    (doc.getElementById("scan-button") as HTMLButtonElement).addEventListener(
        "click",
        () => void scan.scan(),
    );

    const deauth = new DeauthController(
        doc.getElementById("deauth-view") as HTMLElement,
        api,
    );
    deauth.start();

    const enroll = new EnrollController(
        doc.getElementById("enroll-result") as HTMLElement,
        api,
    );
    const form = doc.getElementById("enroll-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
        event.preventDefault();
        const label = (doc.getElementById("enroll-label") as HTMLInputElement).value;
        const fileInput = doc.getElementById("enroll-capture") as HTMLInputElement;
        const file = fileInput.files?.[0];
        if (!label || !file) {
            return;
        }
        void fileToBase64(file).then((b64) => enroll.enroll(label, b64));
    });
}

// Browser entry point; tests import the controllers directly.
if (typeof document !== "undefined" && document.getElementById("scan-view")) {
    mountApp(document, new ApiClient(""));
}
