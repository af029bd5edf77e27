#!/usr/bin/env python3
"""Solves a cgramap LP file with HiGHS and writes a cgramap solution file.

usage: highs_solve.py MODEL.lp SOLUTION.sol [TIME_LIMIT] [SEED]

Use as an external solver command template:
  --solver 'external:python3 tools/highs_solve.py {lp} {sol} {time} {seed}'

The solution file holds a `status <word>` line followed by `<var> <value>`
lines for every column.
"""

import sys

import highspy


def main(argv):
    if len(argv) < 3:
        sys.stderr.write(__doc__)
        return 2
    lp_path, sol_path = argv[1], argv[2]
    time_limit = float(argv[3]) if len(argv) > 3 else None
    seed = int(argv[4]) if len(argv) > 4 else 0

    with open(lp_path) as f:
        text = f.read()
    # Models that are infeasible by construction carry only a comment marker.
    if any(line.startswith("\\ infeasible") for line in text.splitlines()):
        with open(sol_path, "w") as out:
            out.write("status infeasible\n")
        return 0

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if time_limit is not None:
        h.setOptionValue("time_limit", time_limit)
    h.setOptionValue("random_seed", seed % 2147483647)
    h.setOptionValue("threads", 1)
    if h.readModel(lp_path) == highspy.HighsStatus.kError:
        sys.stderr.write("HiGHS could not read %s\n" % lp_path)
        return 1
    h.run()
    status = h.getModelStatus()
    st = highspy.HighsModelStatus
    lines = []
    if status in (st.kInfeasible, st.kUnboundedOrInfeasible):
        lines.append("status infeasible")
    elif status == st.kModelEmpty:
        lines.append("status optimal")
    elif status in (st.kOptimal, st.kTimeLimit, st.kSolutionLimit, st.kInterrupt, st.kIterationLimit):
        info = h.getInfo()
        has_solution = info.primal_solution_status == 2  # kSolutionStatusFeasible
        if status == st.kOptimal:
            lines.append("status optimal")
        elif has_solution:
            lines.append("status feasible")
        else:
            lines.append("status timeout")
        if has_solution or status == st.kOptimal:
            values = h.getSolution().col_value
            for i, v in enumerate(values):
                lines.append("%s %d" % (h.getColName(i)[1], int(round(v))))
    else:
        sys.stderr.write("HiGHS returned %s\n" % h.modelStatusToString(status))
        return 1
    with open(sol_path, "w") as out:
        out.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
