/** Client-side rotating projection.
 *
 * Mirror of the service's reference implementation so the scatter view
 * can animate at frame rate without a round trip per tick: Givens
 * rotations on consecutive axis pairs (i, i+1) with angular velocities
 * 1/(i+2), followed by modified Gram-Schmidt on the two basis columns.
 * The service's projection route is the conformance reference; both
 * sides run float64, so 100 shared-basis steps agree far inside 1e-4.
 */

export type Basis = Float64Array[]; // d rows of [x, y]

export function initialBasis(d: number): Basis {
	if (d < 2) throw new Error(`projection needs d >= 2, got ${d}`);
	const basis: Basis = [];
	for (let i = 0; i < d; i++) {
		basis.push(new Float64Array([i === 0 ? 1 : 0, i === 1 ? 1 : 0]));
	}
	return basis;
}

export function basisFromRows(rows: number[][]): Basis {
	return rows.map((r) => new Float64Array([r[0], r[1]]));
}

export function basisToRows(basis: Basis): number[][] {
	return basis.map((r) => [r[0], r[1]]);
}

export function copyBasis(basis: Basis): Basis {
	return basis.map((r) => new Float64Array(r));
}

export function tourVelocity(pair: number): number {
	return 1 / (pair + 2);
}

function gramSchmidt(basis: Basis): void {
	const d = basis.length;
	let n0 = 0;
	for (let i = 0; i < d; i++) n0 += basis[i][0] * basis[i][0];
	n0 = Math.sqrt(n0);
	for (let i = 0; i < d; i++) basis[i][0] /= n0;
	let dot = 0;
	for (let i = 0; i < d; i++) dot += basis[i][0] * basis[i][1];
	for (let i = 0; i < d; i++) basis[i][1] -= dot * basis[i][0];
	let n1 = 0;
	for (let i = 0; i < d; i++) n1 += basis[i][1] * basis[i][1];
	n1 = Math.sqrt(n1);
	for (let i = 0; i < d; i++) basis[i][1] /= n1;
}

/** One tour tick; returns a new basis, dt = 0 is the identity. */
export function grandTourStep(basis: Basis, dt: number): Basis {
	if (!Number.isFinite(dt)) throw new Error(`dt must be finite, got ${dt}`);
	const out = copyBasis(basis);
	if (dt === 0) return out;
	const d = out.length;
	for (let i = 0; i < d - 1; i++) {
		const theta = tourVelocity(i) * dt;
		const c = Math.cos(theta);
		const s = Math.sin(theta);
		for (let col = 0; col < 2; col++) {
			const top = c * out[i][col] - s * out[i + 1][col];
			const bot = s * out[i][col] + c * out[i + 1][col];
			out[i][col] = top;
			out[i + 1][col] = bot;
		}
	}
	gramSchmidt(out);
	return out;
}

export function orthonormalityError(basis: Basis): number {
	const d = basis.length;
	let g00 = 0;
	let g01 = 0;
	let g11 = 0;
	for (let i = 0; i < d; i++) {
		g00 += basis[i][0] * basis[i][0];
		g01 += basis[i][0] * basis[i][1];
		g11 += basis[i][1] * basis[i][1];
	}
	return Math.max(Math.abs(g00 - 1), Math.abs(g01), Math.abs(g11 - 1));
}

/** Project n points (row-major n x d) onto the basis: n x 2. */
export function project(points: Float32Array | Float64Array, d: number, basis: Basis): Float64Array {
	const n = points.length / d;
	const out = new Float64Array(n * 2);
	for (let p = 0; p < n; p++) {
		let x = 0;
		let y = 0;
		const off = p * d;
		for (let i = 0; i < d; i++) {
			const v = points[off + i];
			x += v * basis[i][0];
			y += v * basis[i][1];
		}
		out[p * 2] = x;
		out[p * 2 + 1] = y;
	}
	return out;
}

/** Drag one axis handle to (x, y) in projection space, then re-fit the
 * basis; the touched axis keeps its requested direction as closely as
 * orthonormality allows (constrained direct manipulation). */
export function dragAxis(basis: Basis, axis: number, x: number, y: number): Basis {
	const out = copyBasis(basis);
	out[axis][0] = x;
	out[axis][1] = y;
	gramSchmidt(out);
	return out;
}
