import sys

from grassgeo.main import main


sys.exit(main())
