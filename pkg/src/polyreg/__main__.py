from polyreg.cli import main
import sys

sys.exit(main())
