long fib_iter(int n) {
  long a = 0;
  long b = 1;
  for (int i = 0; i < n; i++) {
    long t = a + b;
    a = b;
    b = t;
  }
  return a;
}

long fib_rec(int n) {
  if (n < 2) {
    return n;
  }
  return fib_rec(n - 1) + fib_rec(n - 2);
}

long factorial(int n) {
  long r = 1;
  while (n > 1) {
    r = r * n;
    n--;
  }
  return r;
}
