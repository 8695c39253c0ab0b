// Typed client for the scan service's JSON endpoints.  The dashboard holds
// no detection logic of its own: everything shown comes straight from
// these responses.

export type VerdictKind = "legitimate" | "evil_twin" | "unregistered";

export interface ApRow {
    ssid: string | null;
    bssid: string;
    ssi_dbm: number | null;
    verdict: VerdictKind;
    reason: string;
    matched_label: string | null;
    frame_count: number;
    fingerprint: string;
}

export interface ScanResponse {
    request_id: string;
    status: "ok" | "busy" | "error";
    aps?: ApRow[];
    diagnostics?: string[];
    elapsed_ms?: number;
    error?: string;
}

export interface Campaign {
    bssid: string;
    reason_code: number;
    interval_ms: number;
    started_at: number;
    stopped_at: number | null;
    emitted_count: number;
    active: boolean;
}

export interface EnrolledRecord {
    label: string;
    bssid: string;
    max_ssi_dbm: number;
}

export interface StoredRecord extends EnrolledRecord {
    ssid: string | null;
    enrolled_at: number;
    updated_at: number;
    fingerprint: string;
}

export class ApiError extends Error {
    constructor(message: string, readonly status: number) {
        super(message);
    }
}

async function asJson<T>(response: Response): Promise<T> {
    const body = (await response.json()) as T & { error?: string };
    if (!response.ok && response.status !== 503) {
        throw new ApiError(body.error ?? `HTTP ${response.status}`, response.status);
    }
    return body;
}

export class ApiClient {
    constructor(private baseUrl = "", private token = "") {}

    setToken(token: string): void {
        this.token = token;
    }

    private headers(admin: boolean): Record<string, string> {
        const headers: Record<string, string> = { "Content-Type": "application/json" };
        if (admin) {
            headers["X-Admin-Token"] = this.token;
        }
        return headers;
    }

    async scan(sources: string[], options: Record<string, unknown> = {}): Promise<ScanResponse> {
        const response = await fetch(`${this.baseUrl}/scan`, {
            method: "POST",
            headers: this.headers(false),
            body: JSON.stringify({ sources, options }),
        });
        // busy (503) is a normal answer, not a failure
        return asJson<ScanResponse>(response);
    }

    async deauthCampaigns(): Promise<Campaign[]> {
        const response = await fetch(`${this.baseUrl}/deauth`);
        const body = await asJson<{ campaigns: Campaign[] }>(response);
        return body.campaigns;
    }

    async stopDeauth(bssid: string): Promise<Campaign | null> {
        const response = await fetch(`${this.baseUrl}/deauth/${bssid}/stop`, {
            method: "POST",
            headers: this.headers(true),
        });
        const body = await asJson<{ campaign: Campaign | null }>(response);
        return body.campaign;
    }

    async enroll(
        label: string,
        captureB64: string,
        dryRun = false,
    ): Promise<EnrolledRecord[]> {
        const response = await fetch(`${this.baseUrl}/admin/enroll`, {
            method: "POST",
            headers: this.headers(true),
            body: JSON.stringify({ label, capture_b64: captureB64, dry_run: dryRun }),
        });
        const body = await asJson<{ records: EnrolledRecord[] }>(response);
        return body.records;
    }

    async fingerprints(): Promise<StoredRecord[]> {
        const response = await fetch(`${this.baseUrl}/admin/fingerprints`, {
            headers: this.headers(true),
        });
        const body = await asJson<{ records: StoredRecord[] }>(response);
        return body.records;
    }
}
