#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msite/context.hpp"
#include "msite/rng.hpp"
#include "msite/time.hpp"

namespace msite {

enum class MessageCategory { DefeatistChallenge, ThreatChallenge, SocialEncouragement, GoalActivityEncouragement };
inline constexpr MessageCategory kAllCategories[] = {
    MessageCategory::DefeatistChallenge, MessageCategory::ThreatChallenge, MessageCategory::SocialEncouragement,
    MessageCategory::GoalActivityEncouragement};

[[nodiscard]] std::string_view to_string(MessageCategory c) noexcept;
[[nodiscard]] std::optional<MessageCategory> parse_category(std::string_view text);

enum class MessageAuthor { Therapist, Seed };
enum class MessagePool { Personalized, Generic };
[[nodiscard]] std::string_view to_string(MessagePool p) noexcept;

struct Message {
    std::string message_id;
    std::optional<std::string> participant_scope;  // absent for generic messages
    MessageCategory category = MessageCategory::DefeatistChallenge;
    std::string text;
    MessageAuthor created_by = MessageAuthor::Seed;
    Timestamp created_at;

    friend bool operator==(const Message&, const Message&) = default;
};

struct SelectedMessage {
    Message message;
    MessagePool pool = MessagePool::Generic;
    Timestamp drawn_at;

    friend bool operator==(const SelectedMessage&, const SelectedMessage&) = default;
};

struct SeedMessage {
    MessageCategory category;
    std::string text;
};

/// Home/Alone challenges threat beliefs; every other context challenges defeatist beliefs.
[[nodiscard]] MessageCategory category_for_context(SocialContext context) noexcept;

/// Parses `Category,text` lines (`#` comments). Text runs to end of line and may contain commas.
[[nodiscard]] std::vector<SeedMessage> parse_seed_messages(std::string_view text);
[[nodiscard]] const std::vector<SeedMessage>& default_seed_messages();

/// Generic and therapist-entered messages with per-participant repeat avoidance.
/// Not synchronized; the owning service serializes writes per participant.
class MessageBank {
public:
    static constexpr double kPersonalizedShare = 0.6;

    MessageBank() = default;
    explicit MessageBank(std::span<const SeedMessage> seeds, Timestamp seeded_at = Timestamp{});

    /// Throws EmptyText for blank text.
    const Message& add_message(std::optional<std::string> scope, MessageCategory category, std::string text,
                               MessageAuthor author, Timestamp created_at);

    /// Personalized pool with probability 0.6 when the participant has
    /// messages in `category`, otherwise generic. Within the pool the
    /// least-recently-shown message wins; ties are drawn uniformly.
    /// Throws EmptyGenericPool if no generic message exists for `category`.
    SelectedMessage select_message(const std::string& participant, MessageCategory category, Rng& rng,
                                   Timestamp now);

    [[nodiscard]] std::vector<Message> personalized_for(const std::string& participant) const;
    [[nodiscard]] const std::vector<Message>& messages() const noexcept { return messages_; }
    [[nodiscard]] std::uint64_t show_count(const std::string& participant, const std::string& message_id) const;

private:
    struct ShowState {
        std::uint64_t last_seq = 0;
        std::uint64_t count = 0;
    };
    struct ParticipantShows {
        std::uint64_t seq = 0;
        std::map<std::string, ShowState> by_message;
    };

    std::vector<Message> messages_;
    std::map<std::string, ParticipantShows> shows_;
    std::uint64_t next_generic_ = 1;
    std::uint64_t next_personal_ = 1;
};

}  // namespace msite
