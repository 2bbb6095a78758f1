#include <catch_amalgamated.hpp>

#include <json.hpp>

#include "levyruin/errors.hpp"
#include "levyruin/validation.hpp"

using namespace levyruin;

TEST_CASE("fast criteria pass and the fault is caught") {
    ValidationOptions o;
    for (int id : {9, 11, 12}) CHECK(run_criterion(id, o).pass);
    o.inject_fault = true;
    const CriterionResult r = run_criterion(11, o);
    CHECK_FALSE(r.pass);
    CHECK(r.observed > 1e-3);
}

TEST_CASE("report schema") {
    const CriterionResult r = run_criterion(11, ValidationOptions{});
    const auto j = nlohmann::json::parse(to_json(r));
    for (const char* key : {"criterion", "target", "observed", "tolerance", "pass"}) CHECK(j.contains(key));
    CHECK(format_result(r).rfind("[PASS] 11 ", 0) == 0);
    CHECK_THROWS_AS(run_criterion(14, ValidationOptions{}), ConfigError);
}
