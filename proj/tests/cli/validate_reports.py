"""Runs the bench CLI and validates its JSON output against docs/*.schema.json."""
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

RUNS_COLUMNS = ("solver,problem,seed,status,success,iterations,wall_time,n_f,n_g,n_H,n_hvp,"
                "f,grad_norm,raw_iterations,raw_time").split(",")


def main() -> int:
    bench, docs = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    report_schema = json.loads((docs / "report.schema.json").read_text())
    result_schema = json.loads((docs / "result.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(report_schema)
    jsonschema.Draft202012Validator.check_schema(result_schema)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        out = tmp / "results"
        subprocess.run([str(bench), "run", "--solvers", "hsodm,hsodm-hvp,newton-tr,cubic",
                        "--problems", "rosenbrock:2,quadratic:10,saddle:4,rosenbrock:3",
                        "--max-iter", "3", "--seed", "1,2", "--jobs", "2", "--out", str(out)],
                       check=True)
        report = json.loads((out / "report.json").read_text())
        jsonschema.validate(report, report_schema)
        assert any(not r["success"] for r in report["runs"]), "expected capped failures"
        for r in report["runs"]:
            if not r["success"]:
                assert r["iterations"] == 3 and r["wall_time"] == 3.0, r

        with open(out / "runs.csv", newline="") as f:
            reader = csv.reader(f)
            assert next(reader) == RUNS_COLUMNS
            assert sum(1 for _ in reader) == len(report["runs"]) == 32

        prof = tmp / "profiles"
        subprocess.run([str(bench), "profile", "--in", str(out / "runs.csv"),
                        "--metric", "iterations,gradient_evals", "--out", str(prof)], check=True)
        for metric in ("iterations", "gradient_evals"):
            jsonschema.validate(json.loads((prof / f"profile_{metric}.json").read_text()),
                                report_schema["$defs"]["profile"] | {"$defs": report_schema["$defs"]})
            with open(prof / f"profile_{metric}_hsodm.csv", newline="") as f:
                assert next(csv.reader(f)) == ["alpha", "fraction"]

        for solver, problem in (("hsodm", "saddle:4"), ("hsodm-hvp", "rosenbrock:10"),
                                ("newton-tr", "powell:8"), ("cubic", "rosenbrock:2")):
            path = tmp / f"{solver}.json"
            subprocess.run([str(bench), "solve", "-s", solver, "-p", problem, "--json", str(path),
                            "--with-trace", "--set", "max_iters=50" if solver in ("newton-tr", "cubic")
                            else "max_outer_iters=50"], check=False, stdout=subprocess.DEVNULL)
            result = json.loads(path.read_text())
            jsonschema.validate(result, result_schema)
            assert result["solver"] == solver and len(result["trace"]) > 0

    print("report and result JSON validate against the documented schemas")
    return 0


if __name__ == "__main__":
    sys.exit(main())
