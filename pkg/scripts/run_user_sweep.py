"""Sum SE at 10 dB versus the number of users K for R_UE in {1, 2}."""

from _common import parser, run

if __name__ == "__main__":
    args = parser(__doc__, default_realizations=100).parse_args()
    run("user_sweep", args)
