// Checks that every mathematical operation of the library appears in the
// docs/math_map.md table and that every symbol named there still exists in
// the headers. Exits nonzero listing anything missing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

const char* kRequiredSymbols[] = {
    // model
    "power_map", "half_power_map", "monotonicity_gap", "check_vector_inequalities",
    "chain_rule_identity_residual",
    // discretization
    "build_time_grid", "average_boundary", "backward_difference",
    // stepper
    "functional_value", "functional_gradient", "solve_step", "step_residual",
    // solver
    "solve", "refine_study",
    // estimates
    "energy_lhs", "boundary_majorant", "check_galerkin_estimate", "gronwall_trace",
    "check_average_contraction",
    // verification
    "max_principle_check", "comparison_check", "gamma_squeeze", "weak_form_residual",
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: doc_lint <repository root>\n");
    return 2;
  }
  const std::filesystem::path root = argv[1];
  const std::string table = read_file(root / "docs" / "math_map.md");
  if (table.empty()) {
    std::fprintf(stderr, "doc_lint: docs/math_map.md missing or empty\n");
    return 1;
  }

  std::string headers;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root / "include"))
    if (entry.is_regular_file() && entry.path().extension() == ".hpp")
      headers += read_file(entry.path());

  int missing = 0;
  for (const char* symbol : kRequiredSymbols) {
    if (!contains(table, std::string("`") + symbol + "`") &&
        !contains(table, std::string("dnl::") + symbol)) {
      std::printf("missing from docs/math_map.md: %s\n", symbol);
      ++missing;
    }
    if (!contains(headers, std::string(" ") + symbol + "(") &&
        !contains(headers, std::string("\n") + symbol + "(")) {
      std::printf("named in the table but not found in include/: %s\n", symbol);
      ++missing;
    }
  }
  if (missing == 0) {
    std::printf("doc_lint: all %zu operations are documented\n",
                sizeof(kRequiredSymbols) / sizeof(kRequiredSymbols[0]));
    return 0;
  }
  return 1;
}
