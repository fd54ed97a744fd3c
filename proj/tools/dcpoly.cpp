// Command line interface for the dcpoly library.  Subcommands are being
// assembled module by module; this placeholder keeps the build wired.
#include <cstdio>

int main() {
  std::printf("dcpoly: no subcommands registered yet\n");
  return 0;
}
