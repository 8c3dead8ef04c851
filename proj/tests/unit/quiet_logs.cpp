#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

namespace {

class QuietLogs : public ::testing::Environment {
 public:
  void SetUp() override { spdlog::set_level(spdlog::level::off); }
};

const auto* const kQuiet = ::testing::AddGlobalTestEnvironment(new QuietLogs);

}  // namespace
