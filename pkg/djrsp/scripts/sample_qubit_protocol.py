# Project dependencies
from djrsp.bases import TargetState
from djrsp.gates import ChannelSpec
from djrsp.protocol import ProtocolConfig, enumerate_branches, sample_counts


ALPHA = 0.6
X_0 = 0.6
THETA = 1.0
SEED = 2024
SHOTS = 100_000


def main() -> None:
    config = ProtocolConfig(channel=ChannelSpec.qubit(ALPHA), target=TargetState.qubit(X_0, THETA))
    transcript = enumerate_branches(config)
    counts = sample_counts(config, seed=SEED, shots=SHOTS)

    for leaf in transcript.leaves:
        frequency = counts[leaf.path_key] / SHOTS
        print(f"{leaf.path_key:<34} exact: {leaf.probability:.6f}   sampled: {frequency:.6f}")

    f_zero = sum(count for path, count in counts.items() if path.startswith("f=0")) / SHOTS
    print(f"Sampled P(f=0) = {f_zero:.4f} over {SHOTS} shots")


if __name__ == "__main__":
    main()
