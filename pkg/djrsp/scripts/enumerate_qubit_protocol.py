# Project dependencies
from djrsp.bases import TargetState
from djrsp.gates import ChannelSpec
from djrsp.protocol import ProtocolConfig, enumerate_branches


ALPHA = 0.6
X_0 = 0.6
THETA = 1.0


def main() -> None:
    config = ProtocolConfig(channel=ChannelSpec.qubit(ALPHA), target=TargetState.qubit(X_0, THETA))
    transcript = enumerate_branches(config)

    for leaf in transcript.leaves:
        fidelity = "-" if leaf.fidelity is None else f"{leaf.fidelity:.12f}"
        print(
            f"{leaf.path_key:<34} probability: {leaf.probability:.6f}   "
            f"correction: {leaf.applied_correction or '-':<3} fidelity: {fidelity}"
        )

    p_zero, p_one = transcript.summary.f_probabilities
    print(f"P(f=0) = {p_zero:.12f}, P(f=1) = {p_one:.12f}")
    print(f"Total success probability: {transcript.summary.total_success_probability:.12f}")


if __name__ == "__main__":
    main()
