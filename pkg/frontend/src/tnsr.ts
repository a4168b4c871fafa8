/** Decoder for the binary tensor wire format: magic "TNSR",
 * ndim u32, dims u32 x ndim, float32 little-endian payload. */

export interface Tensor {
	dims: number[];
	data: Float32Array;
}

export function decodeTensor(buffer: ArrayBuffer): Tensor {
	const view = new DataView(buffer);
	if (buffer.byteLength < 8 || view.getUint32(0, false) !== 0x544e5352) {
		// "TNSR" big-endian read of the 4 magic bytes
		throw new Error("not a TNSR payload");
	}
	const ndim = view.getUint32(4, true);
	const headerBytes = 8 + 4 * ndim;
	if (buffer.byteLength < headerBytes) {
		throw new Error("TNSR header truncated");
	}
	const dims: number[] = [];
	let numel = 1;
	for (let i = 0; i < ndim; i++) {
		const d = view.getUint32(8 + 4 * i, true);
		dims.push(d);
		numel *= d;
	}
	if (buffer.byteLength !== headerBytes + 4 * numel) {
		throw new Error("TNSR payload length mismatch");
	}
	return { dims, data: new Float32Array(buffer, headerBytes, numel) };
}
