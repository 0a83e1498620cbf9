/* tslint:disable */
/* eslint-disable */

/**
 * A generated world, its fitted model and a held-out split for evaluation.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    constructor(n_users: number, n_items: number, bandwidth: number, seed: bigint);
    /**
     * Plain and diversified top-`n` lists for one user.
     */
    recommend(user: string, lambda: number, tau: number, n: number): string;
    /**
     * True against fitted positions for every user and item.
     */
    scatter(): string;
    /**
     * Held-out precision and list spread over an even grid of lambda values.
     */
    tradeoff(steps: number, tau: number, n: number): string;
    readonly num_users: number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly demo_num_users: (a: number) => number;
    readonly demo_recommend: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_scatter: (a: number) => [number, number];
    readonly demo_tradeoff: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
