#include <set>

#include <doctest.h>

#include "../support.hpp"
#include "msite/error.hpp"
#include "msite/message_bank.hpp"

using namespace msite;
using testing_support::ts;

namespace {
const auto kNow = ts("2026-01-05T12:00:00Z");
}

TEST_CASE("category follows context") {
    CHECK(category_for_context({Location::Home, Company::Alone}) == MessageCategory::ThreatChallenge);
    CHECK(category_for_context({Location::Home, Company::WithOthers}) == MessageCategory::DefeatistChallenge);
    CHECK(category_for_context({Location::Away, Company::Alone}) == MessageCategory::DefeatistChallenge);
    CHECK(category_for_context({Location::Away, Company::WithOthers}) == MessageCategory::DefeatistChallenge);
}

TEST_CASE("seed message parsing keeps commas in text") {
    const auto seeds = parse_seed_messages("# header\nThreatChallenge,One, two, three\n\nSocialEncouragement,Hi\n");
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].text == "One, two, three");
    CHECK(seeds[1].category == MessageCategory::SocialEncouragement);
    CHECK_THROWS_AS((void)parse_seed_messages("NotACategory,text\n"), Error);
    CHECK_FALSE(default_seed_messages().empty());
    for (auto c : kAllCategories) {
        CHECK(std::any_of(default_seed_messages().begin(), default_seed_messages().end(),
                          [&](const SeedMessage& s) { return s.category == c; }));
    }
}

TEST_CASE("ids and blank text") {
    MessageBank bank;
    CHECK(bank.add_message(std::nullopt, MessageCategory::ThreatChallenge, "a", MessageAuthor::Seed, kNow).message_id == "g1");
    CHECK(bank.add_message("P", MessageCategory::ThreatChallenge, "b", MessageAuthor::Therapist, kNow).message_id == "p1");
    CHECK(bank.add_message(std::nullopt, MessageCategory::ThreatChallenge, "c", MessageAuthor::Seed, kNow).message_id == "g2");
    CHECK_THROWS_AS(bank.add_message("P", MessageCategory::ThreatChallenge, "   ", MessageAuthor::Therapist, kNow), Error);
    CHECK(bank.personalized_for("P").size() == 1);
    CHECK(bank.personalized_for("Q").empty());
}

TEST_CASE("empty generic pool is an error") {
    MessageBank bank;
    Rng rng(1);
    CHECK_THROWS_AS(bank.select_message("P", MessageCategory::ThreatChallenge, rng, kNow), Error);
}

TEST_CASE("least recently shown wins within a pool") {
    MessageBank bank;
    for (int i = 0; i < 4; ++i) {
        bank.add_message(std::nullopt, MessageCategory::SocialEncouragement, "m" + std::to_string(i), MessageAuthor::Seed, kNow);
    }
    Rng rng(2);
    std::set<std::string> first_round;
    for (int i = 0; i < 4; ++i) {
        first_round.insert(bank.select_message("P", MessageCategory::SocialEncouragement, rng, kNow).message.message_id);
    }
    CHECK(first_round.size() == 4);
    // Another participant's history is separate.
    CHECK(bank.show_count("Q", "g1") == 0);
    for (int i = 0; i < 4; ++i) CHECK(bank.show_count("P", "g" + std::to_string(i + 1)) == 1);
}

TEST_CASE("personalized share is about 0.6") {
    MessageBank bank(default_seed_messages(), kNow);
    bank.add_message("P", MessageCategory::ThreatChallenge, "Yours", MessageAuthor::Therapist, kNow);
    Rng rng(8, "unit/share");
    int personal = 0;
    for (int i = 0; i < 5000; ++i) {
        const auto s = bank.select_message("P", MessageCategory::ThreatChallenge, rng, kNow);
        CHECK(s.message.category == MessageCategory::ThreatChallenge);
        personal += s.pool == MessagePool::Personalized;
    }
    CHECK(personal / 5000.0 == doctest::Approx(0.6).epsilon(0.05));
}
