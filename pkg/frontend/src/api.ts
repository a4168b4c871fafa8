/** Typed fetch client for the workbench service. All views go through
 * this; the UI never computes policy or clustering math locally. */

import { decodeTensor, Tensor } from "./tnsr.js";
import type {
	ClassificationDoc,
	ClassificationEnvelope,
	ForwardResult,
	JobStatus,
	MazeInfo,
	NetworkInfo,
	ProjectionResult,
	SaliencyResult,
} from "./types.js";

export class ApiError extends Error {
	constructor(
		public status: number,
		public code: string,
		message: string,
	) {
		super(message);
	}
}

async function parseError(resp: Response): Promise<never> {
	let code = "error";
	let message = `${resp.status} ${resp.statusText}`;
	try {
		const body = await resp.json();
		if (body?.error) {
			code = body.error.code ?? code;
			message = body.error.message ?? message;
		}
	} catch {
		// non-JSON error body; keep the status line
	}
	throw new ApiError(resp.status, code, message);
}

export class WorkbenchClient {
	constructor(public base: string) {}

	private async json<T>(path: string, init?: RequestInit): Promise<T> {
		const resp = await fetch(this.base + path, {
			headers: { "content-type": "application/json" },
			...init,
		});
		if (!resp.ok) await parseError(resp);
		return (await resp.json()) as T;
	}

	private post<T>(path: string, body: unknown): Promise<T> {
		return this.json<T>(path, { method: "POST", body: JSON.stringify(body) });
	}

	health(): Promise<{ status: string }> {
		return this.json("/api/health");
	}

	network(): Promise<NetworkInfo> {
		return this.json("/api/network");
	}

	async createSession(): Promise<string> {
		const r = await this.post<{ session: string }>("/api/sessions", {});
		return r.session;
	}

	generateMaze(sid: string, seed: number, size: number): Promise<MazeInfo> {
		return this.post(`/api/sessions/${sid}/mazes`, { seed, size });
	}

	getMaze(sid: string, mid: string): Promise<MazeInfo> {
		return this.json(`/api/sessions/${sid}/mazes/${mid}`);
	}

	setCell(sid: string, mid: string, row: number, col: number, kind: "FREE" | "BLOCKED"): Promise<MazeInfo> {
		return this.json(`/api/sessions/${sid}/mazes/${mid}/cells`, {
			method: "PUT",
			body: JSON.stringify({ row, col, kind }),
		});
	}

	placeEntity(sid: string, mid: string, entity: "mouse" | "cheese", row: number, col: number): Promise<MazeInfo> {
		return this.post(`/api/sessions/${sid}/mazes/${mid}/entities`, {
			entity,
			action: "place",
			row,
			col,
		});
	}

	removeCheese(sid: string, mid: string): Promise<MazeInfo> {
		return this.post(`/api/sessions/${sid}/mazes/${mid}/entities`, {
			entity: "cheese",
			action: "remove",
		});
	}

	forward(sid: string, maze: string, capture: string[]): Promise<ForwardResult> {
		return this.post(`/api/sessions/${sid}/forward`, { maze, capture });
	}

	async layerTensor(sid: string, trace: string, layer: string): Promise<Tensor> {
		const resp = await fetch(`${this.base}/api/sessions/${sid}/traces/${trace}/layers/${layer}`);
		if (!resp.ok) await parseError(resp);
		return decodeTensor(await resp.arrayBuffer());
	}

	startCluster(sid: string, trace: string, layer: string, method: string, params: Record<string, unknown>): Promise<string> {
		return this.post<{ job: string }>(`/api/sessions/${sid}/cluster`, {
			trace,
			layer,
			method,
			params,
		}).then((r) => r.job);
	}

	jobStatus(sid: string, job: string): Promise<JobStatus> {
		return this.json(`/api/sessions/${sid}/jobs/${job}`);
	}

	async waitForJob(sid: string, job: string, pollMs = 100, timeoutMs = 120_000): Promise<JobStatus> {
		const deadline = Date.now() + timeoutMs;
		for (;;) {
			const status = await this.jobStatus(sid, job);
			if (status.status === "done" || status.status === "error" || status.status === "cancelled") {
				return status;
			}
			if (Date.now() > deadline) throw new Error(`job ${job} timed out`);
			await new Promise((r) => setTimeout(r, pollMs));
		}
	}

	getClassification(sid: string, cid: string): Promise<ClassificationEnvelope> {
		return this.json(`/api/sessions/${sid}/classifications/${cid}`);
	}

	putClassification(sid: string, cid: string, document: ClassificationDoc, rev: number): Promise<{ rev: number }> {
		return this.json(`/api/sessions/${sid}/classifications/${cid}`, {
			method: "PUT",
			body: JSON.stringify({ document, rev }),
		});
	}

	reassign(sid: string, cid: string, points: number[], target: number | "new"): Promise<ClassificationEnvelope> {
		return this.post(`/api/sessions/${sid}/classifications/${cid}/reassign`, {
			points,
			target,
		});
	}

	undo(sid: string, cid: string): Promise<ClassificationEnvelope> {
		return this.post(`/api/sessions/${sid}/classifications/${cid}/undo`, {});
	}

	redo(sid: string, cid: string): Promise<ClassificationEnvelope> {
		return this.post(`/api/sessions/${sid}/classifications/${cid}/redo`, {});
	}

	saliency(sid: string, maze: string, target: string, reduction = "l2"): Promise<SaliencyResult> {
		return this.post(`/api/sessions/${sid}/saliency`, { maze, target, reduction });
	}

	projection(sid: string, classification: string, dt: number, steps: number, basis?: number[][]): Promise<ProjectionResult> {
		return this.post(`/api/sessions/${sid}/projection`, {
			classification,
			dt,
			steps,
			basis: basis ?? null,
		});
	}
}
