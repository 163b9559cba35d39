// Seeded pedestrians leave the hidden leg of the corner map, cross the corner
// and walk down the robot's leg. A moving robot must never touch one.

#include <gtest/gtest.h>

#include "oampc/scenario_io.hpp"

namespace oampc {
namespace {

TEST(SafetyProperty, CornerEmergingAgents) {
  const Scenario base = parse_scenario(OAMPC_SCENARIO_DIR "/corner_soak.scenario");
  int steps = 0, contacts = 0, moving_contacts = 0, finished = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    Scenario sc = base;
    sc.seed = seed;
    const RunResult res = run(sc);
    finished += res.finished;
    for (const auto& row : res.log) {
      ++steps;
      if (!row.collision) continue;
      ++contacts;
      if (row.input.v > sc.mpc.feas_tol) {
        ++moving_contacts;
        ADD_FAILURE() << "seed " << seed << " step " << row.step << ": contact at v = " << row.input.v;
      }
    }
  }
  RecordProperty("steps", steps);
  RecordProperty("contacts_while_stopped", contacts - moving_contacts);
  RecordProperty("finished_runs", finished);
  std::printf("500 trials, %d steps, %d finished, %d contacts with a stopped robot, %d while moving\n", steps, finished,
              contacts - moving_contacts, moving_contacts);
  EXPECT_EQ(moving_contacts, 0);
}

}  // namespace
}  // namespace oampc
