import sys

from stlhdr.cli.main import main

sys.exit(main())
