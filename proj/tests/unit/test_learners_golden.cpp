#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "json.hpp"
#include "tdlab/learners.hpp"

namespace {

using nlohmann::json;
using namespace tdlab;

json load_golden() {
  std::ifstream in(std::string(TDLAB_GOLDEN_DIR) + "/learners_3step.json");
  if (!in) throw std::runtime_error("golden transcript missing");
  return json::parse(in);
}

TEST(LearnersGolden, EveryAlgorithmMatchesTranscript) {
  const json golden = load_golden();
  std::map<std::size_t, std::vector<double>> features;
  for (const auto& [key, value] : golden.at("features").items()) {
    features[std::stoul(key)] = value.get<std::vector<double>>();
  }
  std::vector<TransitionSample> trajectory;
  for (const auto& step : golden.at("trajectory")) {
    TransitionSample t;
    t.s = step.at("s");
    t.s_next = step.at("s_next");
    t.reward = step.at("reward");
    t.gamma_next = step.at("gamma_next");
    t.rho = step.at("rho");
    trajectory.push_back(t);
  }
  const auto w0 = golden.at("w0").get<std::vector<double>>();

  std::size_t checked = 0;
  for (const auto& c : golden.at("cases")) {
    const auto name = c.at("algorithm").get<std::string>();
    SCOPED_TRACE(name + " alpha=" + c.at("alpha").dump() + " lambda=" + c.at("lambda").dump());
    const auto& algorithm = find_algorithm(name);
    HyperParams hp{c.at("alpha"), c.at("eta"), c.at("lambda"), c.at("beta_scale")};
    auto state = make_learner_state(w0);
    const auto& steps = c.at("steps");
    ASSERT_EQ(steps.size(), trajectory.size());
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
      algorithm.update(state, trajectory[t], features.at(trajectory[t].s),
                       features.at(trajectory[t].s_next), hp);
      const auto w = steps[t].at("w").get<std::vector<double>>();
      const auto h = steps[t].at("h").get<std::vector<double>>();
      for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_NEAR(state.w[i], w[i], 1e-13) << "step " << t << " w[" << i << "]";
        EXPECT_NEAR(state.h[i], h[i], 1e-13) << "step " << t << " h[" << i << "]";
      }
    }
    ++checked;
  }
  EXPECT_EQ(checked, 3 * algorithms().size());
}

}  // namespace
