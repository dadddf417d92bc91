# Present so pytest puts this directory on sys.path (for helpers.py).
