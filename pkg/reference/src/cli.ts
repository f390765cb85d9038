/**
 * Command line entry point: `node dist/cli.js check <vector-file>`.
 *
 * Exit codes: 0 all cases agree, 2 mismatch or unusable file content,
 * 3 usage error, 4 I/O error.
 */

import { VectorFormatError, checkFile } from "./checker.js";

function main(argv: string[]): number {
  if (argv.length !== 2 || argv[0] !== "check") {
    console.error("usage: cli.js check <vector-file>");
    return 3;
  }
  const path = argv[1] as string;
  let result;
  try {
    result = checkFile(path);
  } catch (err) {
    if (err instanceof VectorFormatError) {
      console.error(err.message);
      return 2;
    }
    if (err instanceof Error && "code" in err) {
      console.error(err.message);
      return 4;
    }
    throw err;
  }
  for (const mismatch of result.mismatches) {
    console.log(`mismatch: ${mismatch}`);
  }
  const status = result.mismatches.length === 0 ? "OK" : "FAIL";
  console.log(`vectors: ${status} (${result.checked} cases, ${result.mismatches.length} mismatches)`);
  return result.mismatches.length === 0 ? 0 : 2;
}

process.exit(main(process.argv.slice(2)));
