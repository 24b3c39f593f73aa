x = = 1
