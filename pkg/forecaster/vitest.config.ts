import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    // model-training tests are CPU-bound; run files one at a time so the
    // deterministic-seed assertions aren't starved by sibling workers
    pool: 'threads',
    poolOptions: { threads: { singleThread: true } },
    testTimeout: 300_000,
    hookTimeout: 120_000,
  },
});
