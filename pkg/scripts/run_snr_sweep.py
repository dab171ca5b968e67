"""Sum SE versus SNR at M_R=16, K=2, M_Tk=4, R_UE=2, N=64 for all three methods."""

from _common import parser, run

if __name__ == "__main__":
    args = parser(__doc__, default_realizations=100).parse_args()
    run("snr_sweep", args)
