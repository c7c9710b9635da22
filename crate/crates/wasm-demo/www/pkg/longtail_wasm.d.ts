/* tslint:disable */
/* eslint-disable */

export function box_iou(a: Float64Array, b: Float64Array): number;

/**
 * Remaps a normalized box into a pixel crop of the image.
 */
export function crop_box(bbox: Float64Array, image_w: number, image_h: number, crop: Float64Array, min_visible: number): string;

/**
 * Frechet distance between two Gaussians given as mean and row-major covariance.
 */
export function gaussian_fid(mu_r: Float64Array, sigma_r: Float64Array, mu_g: Float64Array, sigma_g: Float64Array): string;

/**
 * Per-class share of training slots under each sampling strategy.
 */
export function sampling_shares(counts: Uint32Array, threshold: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly box_iou: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly crop_box: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly gaussian_fid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly sampling_shares: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
