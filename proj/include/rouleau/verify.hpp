#ifndef ROULEAU_VERIFY_HPP
#define ROULEAU_VERIFY_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace rouleau {

struct CheckRow {
  int id = 0;
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=" or "<": value against threshold
  // set by the criterion for its secondary conditions, then combined with the main comparison
  double threshold = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string note;
};

struct VerifyOptions {
  int threads = 1;
  double R = 512.0;        // truncation for the long self-similar run
  double tau_max = 3.0;
  int count = 40;          // checkpoints of that run
  double resolved_tol = 1e-6;
  std::map<int, double> thresholds;  // replaces a criterion's main threshold
};

// criteria ids in a suite: oracles, localization, laplace, all
std::vector<int> suite_criteria(const std::string& suite);

class Verifier {
 public:
  explicit Verifier(const VerifyOptions& opt, std::ostream* progress = nullptr);
  ~Verifier();
  Verifier(const Verifier&) = delete;
  Verifier& operator=(const Verifier&) = delete;

  CheckRow run(int id);
  std::vector<CheckRow> run_suite(const std::string& suite);

  struct Cache;

 private:
  VerifyOptions opt_;
  std::ostream* progress_;
  Cache* cache_;
};

void print_table(const std::vector<CheckRow>& rows, std::ostream& os);
nlohmann::ordered_json rows_json(const std::vector<CheckRow>& rows);

}  // namespace rouleau

#endif
