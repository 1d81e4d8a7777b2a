import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the e2e suite generates levels and boots the python server in its hooks
    testTimeout: 30_000,
    hookTimeout: 180_000,
  },
});
