import { defineConfig } from "vitest/config";

// generous timeouts: one suite boots the real service in a child process
export default defineConfig({
  test: {
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
