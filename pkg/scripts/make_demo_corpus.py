"""Generate the bundled synthetic demo corpus.

Writes deterministic chart images, including a few frames engineered to
fail each selection screen, so the full pipeline can be exercised without
any external data.
"""

import argparse

from lowlight_forge.synthetic import demo_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dest", help="directory to write the corpus into")
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--size", type=int, default=96)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    paths = demo_corpus(args.dest, count=args.count, size=args.size, seed=args.seed)
    print(f"wrote {len(paths)} images to {args.dest}")


if __name__ == "__main__":
    main()
