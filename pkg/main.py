import sys

if __name__ == "__main__":
    from probe_witness.cli import main

    sys.exit(main(sys.argv[1:]))
