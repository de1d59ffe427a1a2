#include "smib/io/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

// With no arguments every criterion runs; otherwise only the listed ids.
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long v = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || v < 1 || v > 8) {
      std::cerr << "usage: acceptance [criterion 1-8 ...]\n";
      return 1;
    }
    ids.push_back(int(v));
  }
  if (ids.empty()) ids = {1, 2, 3, 4, 5, 6, 7, 8};
  bool all = true;
  for (int id : ids) {
    const auto r = smib::io::check_criterion(id);
    std::cout << smib::io::format_result(r) << std::endl;
    all = all && r.pass;
  }
  return all ? 0 : 3;
}
