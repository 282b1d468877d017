"""treeharm – entry point.

Run with:
    python run.py --list
    python run.py invert-roundtrip --q 2 --radius 3 --nodes 512
    python run.py norm-sweep --symbol pole-halfwidth:0.1 --ps 1.2,2 --plot
"""

import sys

from app.main import main

if __name__ == "__main__":
    sys.exit(main())
