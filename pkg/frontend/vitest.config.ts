import { defineConfig } from "vitest/config";

// The contract suite starts a real editor server in beforeAll; the first
// harvest over the bundled corpus takes a while, hence the long timeouts.
export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 300_000,
  },
});
