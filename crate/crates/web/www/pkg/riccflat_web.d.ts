/* tslint:disable */
/* eslint-disable */

/**
 * `α, β, s, F, G^i, Ric, ᵅRic, H^i_i` at one point and direction.
 */
export function curvature_at(eps: number, phi: string, q0: number, x: Float64Array, y: Float64Array): string;

/**
 * Sample `(x, y)` on the Hopf 3-sphere and return `(s, |Ric|/α²)` pairs
 * for the chosen profile along with the worst hypothesis residuals.
 */
export function ricci_scan(eps: number, phi: string, q0: number, samples: number, seed: number): string;

/**
 * Integrate the Ricci-flat equation with `Q(0) = q0` and return the grid
 * of `s, Q, Q', φ, φ'` with the achieved interval and convexity scan.
 */
export function solve_phi(c1: number, c2: number, n: number, b2: number, q0: number, delta: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly curvature_at: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly ricci_scan: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly solve_phi: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
