// Shared between the vitest global setup (which owns the service
// process) and the live tests (which only read these paths).

import path from "node:path";
import { fileURLToPath } from "node:url";

export const SERVICE_URL = "http://127.0.0.1:18923";

export const TMP_DIR = path.join(path.dirname(fileURLToPath(import.meta.url)), ".tmp");
export const DATA_DIR = path.join(TMP_DIR, "data");
export const BANK_PATH = path.join(TMP_DIR, "bank.ricb");

// Seeded dataset: two direction classes, dir00 pointing near 0 degrees
// and dir01 near 180, three images each.
export const FIXTURE_EAST = path.join(DATA_DIR, "dir00", "000.png");
export const FIXTURE_WEST = path.join(DATA_DIR, "dir01", "000.png");
