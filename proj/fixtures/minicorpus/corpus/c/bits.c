int popcount(unsigned int x) {
  int n = 0;
  while (x) {
    n += x & 1u;
    x >>= 1;
  }
  return n;
}

int is_power_of_two(unsigned int x) {
  return x != 0 && (x & (x - 1)) == 0;
}

unsigned int reverse_bits(unsigned int x) {
  unsigned int r = 0;
  for (int i = 0; i < 32; i++) {
    r = (r << 1) | (x & 1u);
    x >>= 1;
  }
  return r;
}
