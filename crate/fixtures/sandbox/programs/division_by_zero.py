a, b = map(int, input().split())
a // 0
