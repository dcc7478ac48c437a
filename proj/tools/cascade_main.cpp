#include <cstdio>

int main() {
  std::printf("cascade: command-line interface not implemented yet\n");
  return 1;
}
