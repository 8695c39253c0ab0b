// Pure HTML renderers.  Row coloring follows the server verdict and
// nothing else: evil_twin rows are red, unregistered amber, legitimate
// neutral.  Rows keep the server's order (it already sorts by severity).

import type { ApRow, Campaign, EnrolledRecord, ScanResponse } from "./api.js";

export function escapeHtml(value: unknown): string {
    return String(value)
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

function apRow(row: ApRow): string {
    const ssid = row.ssid === null ? "(hidden)" : row.ssid;
    const ssi = row.ssi_dbm === null ? "-" : `${row.ssi_dbm} dBm`;
    return (
        `<tr class="ap-row verdict-${row.verdict}" data-bssid="${escapeHtml(row.bssid)}"` +
        ` data-fingerprint="${escapeHtml(row.fingerprint)}">` +
        `<td>${escapeHtml(ssid)}</td>` +
        `<td class="mono">${escapeHtml(row.bssid)}</td>` +
        `<td>${escapeHtml(ssi)}</td>` +
        `<td>${escapeHtml(row.verdict)}</td>` +
        `<td>${escapeHtml(row.reason)}</td>` +
        `<td>${row.matched_label === null ? "-" : escapeHtml(row.matched_label)}</td>` +
        `</tr>`
    );
}

export function renderScanView(response: ScanResponse | null, pending = false): string {
    if (pending) {
        return `<p class="state pending">Scanning…</p>`;
    }
    if (response === null) {
        return `<p class="state idle">No scan yet. Press Scan before joining a network.</p>`;
    }
    if (response.status === "busy") {
        // no stale rows behind a busy answer
        return `<p class="state busy">Server is busy. Retry in a moment.</p>`;
    }
    if (response.status === "error") {
        return `<p class="state error">Scan failed: ${escapeHtml(response.error ?? "unknown error")}</p>`;
    }
    const aps = response.aps ?? [];
    if (aps.length === 0) {
        return `<p class="state empty">No access points seen in this window.</p>`;
    }
    const rows = aps.map(apRow).join("");
    const diagnostics = (response.diagnostics ?? [])
        .map((d) => `<li>${escapeHtml(d)}</li>`)
        .join("");
    return (
        `<table class="ap-table">` +
        `<thead><tr><th>SSID</th><th>BSSID</th><th>Signal</th>` +
        `<th>Verdict</th><th>Reason</th><th>Matched</th></tr></thead>` +
        `<tbody>${rows}</tbody></table>` +
        (diagnostics ? `<ul class="diagnostics">${diagnostics}</ul>` : "")
    );
}

function campaignRow(campaign: Campaign): string {
    const state = campaign.active ? "active" : "stopped";
    const action = campaign.active
        ? `<button class="stop" data-stop="${escapeHtml(campaign.bssid)}">Stop</button>`
        : "stopped";
    return (
        `<tr class="campaign-row campaign-${state}" data-bssid="${escapeHtml(campaign.bssid)}">` +
        `<td class="mono">${escapeHtml(campaign.bssid)}</td>` +
        `<td class="count">${campaign.emitted_count}</td>` +
        `<td>${campaign.interval_ms} ms</td>` +
        `<td>${state}</td>` +
        `<td>${action}</td>` +
        `</tr>`
    );
}

export function renderDeauthView(campaigns: Campaign[]): string {
    if (campaigns.length === 0) {
        return `<p class="state empty">No countermeasure campaigns.</p>`;
    }
    const rows = campaigns.map(campaignRow).join("");
    return (
        `<table class="campaign-table">` +
        `<thead><tr><th>Target BSSID</th><th>Frames sent</th>` +
        `<th>Interval</th><th>State</th><th></th></tr></thead>` +
        `<tbody>${rows}</tbody></table>`
    );
}

export function renderEnrollResult(records: EnrolledRecord[] | null, error: string | null): string {
    if (error !== null) {
        return `<p class="state error">Enroll failed: ${escapeHtml(error)}</p>`;
    }
    if (records === null) {
        return "";
    }
    if (records.length === 0) {
        return `<p class="state empty">Capture contained no access points.</p>`;
    }
    const items = records
        .map(
            (r) =>
                `<li><span class="mono">${escapeHtml(r.bssid)}</span> enrolled as ` +
                `${escapeHtml(r.label)} (max ${r.max_ssi_dbm} dBm)</li>`,
        )
        .join("");
    return `<ul class="enrolled">${items}</ul>`;
}
