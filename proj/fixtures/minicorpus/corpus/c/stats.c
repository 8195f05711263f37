double mean(const double *xs, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; i++) {
    sum += xs[i];
  }
  return n > 0 ? sum / n : 0.0;
}

double variance(const double *xs, int n) {
  double m = mean(xs, n);
  double acc = 0.0;
  for (int i = 0; i < n; i++) {
    double d = xs[i] - m;
    acc += d * d;
  }
  return n > 1 ? acc / (n - 1) : 0.0;
}

double max_value(const double *xs, int n) {
  double best = xs[0];
  for (int i = 1; i < n; i++) {
    if (xs[i] > best) {
      best = xs[i];
    }
  }
  return best;
}
