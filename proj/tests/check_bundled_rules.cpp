// Every rule in the bundle must verify exact and be stored in canonical form.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quadforge/rulefile.hpp"
#include "quadforge/verifier.hpp"

namespace fs = std::filesystem;
using namespace quadforge;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: check_bundled_rules <rules-dir>\n");
    return 64;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(argv[1])) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  int failures = 0;
  for (const char* required : {"2d_p4.json", "2d_p5.json"}) {
    if (!fs::exists(fs::path(argv[1]) / required)) {
      std::printf("FAIL %s missing from bundle\n", required);
      ++failures;
    }
  }
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
      const RuleFile f = parse_rule(text);
      const bool canonical = serialize_rule(f) == text;
      const VerificationReport v = verify_rule(f.rule, f.degree);
      const bool ok = canonical && v.verdict == Verdict::exact;
      std::printf("%s %-14s %dD p=%d q=%zu verdict=%s max|e|=%.2e canonical=%s\n", ok ? "PASS" : "FAIL",
                  path.filename().c_str(), v.dim, v.p, v.q, to_string(v.verdict).c_str(), v.max_abs_error,
                  canonical ? "yes" : "no");
      if (!ok) ++failures;
    } catch (const std::exception& e) {
      std::printf("FAIL %-14s %s\n", path.filename().c_str(), e.what());
      ++failures;
    }
  }
  std::printf("%zu rule files, %d failures\n", files.size(), failures);
  return failures == 0 ? 0 : 1;
}
