#include "msite/message_bank.hpp"

#include <algorithm>

#include "msite/error.hpp"

namespace msite {

namespace {

constexpr std::string_view kDefaultSeedBank = R"(# Generic challenge and encouragement messages, one per line: Category,text
DefeatistChallenge,The best way to find out if someone will like you is to talk to them and see.
DefeatistChallenge,Most people are too busy thinking about themselves to judge you.
DefeatistChallenge,You have had good conversations before. This one could go well too.
DefeatistChallenge,People often enjoy talking with you more than you expect.
DefeatistChallenge,A short chat still counts. You do not have to be perfect to connect.
ThreatChallenge,Going out has gone fine many times before. What actually happened last time?
ThreatChallenge,Feeling anxious does not mean you are in danger.
ThreatChallenge,Stepping out for a short walk is a small and safe way to start.
ThreatChallenge,Your worries about leaving are predictions, not facts. Test one today.
SocialEncouragement,Say hello to one person today and notice how it goes.
SocialEncouragement,Reaching out to a friend or family member can brighten both of your days.
SocialEncouragement,Sitting with others at mealtime is a good chance to start a conversation.
GoalActivityEncouragement,Every step you take moves you closer to your goal.
GoalActivityEncouragement,Activities are often more enjoyable than we expect. Plan one you might like.
GoalActivityEncouragement,Take a moment to remember something you enjoyed doing recently.
)";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

std::string_view to_string(MessageCategory c) noexcept {
    switch (c) {
        case MessageCategory::DefeatistChallenge: return "DefeatistChallenge";
        case MessageCategory::ThreatChallenge: return "ThreatChallenge";
        case MessageCategory::SocialEncouragement: return "SocialEncouragement";
        case MessageCategory::GoalActivityEncouragement: return "GoalActivityEncouragement";
    }
    return "DefeatistChallenge";
}

std::optional<MessageCategory> parse_category(std::string_view text) {
    for (const auto c : kAllCategories) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

std::string_view to_string(MessagePool p) noexcept { return p == MessagePool::Personalized ? "Personalized" : "Generic"; }

MessageCategory category_for_context(SocialContext context) noexcept {
    return context == SocialContext{Location::Home, Company::Alone} ? MessageCategory::ThreatChallenge
                                                                    : MessageCategory::DefeatistChallenge;
}

std::vector<SeedMessage> parse_seed_messages(std::string_view text) {
    std::vector<SeedMessage> out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        const auto category = comma == std::string_view::npos ? std::nullopt : parse_category(trim(line.substr(0, comma)));
        if (!category) throw Error(ErrorCode::InvalidConfig, "seed bank line " + std::to_string(line_no) + ": bad category");
        const auto body = trim(line.substr(comma + 1));
        if (body.empty()) throw Error(ErrorCode::EmptyText, "seed bank line " + std::to_string(line_no));
        out.push_back({*category, std::string(body)});
    }
    return out;
}

const std::vector<SeedMessage>& default_seed_messages() {
    static const std::vector<SeedMessage> seeds = parse_seed_messages(kDefaultSeedBank);
    return seeds;
}

MessageBank::MessageBank(std::span<const SeedMessage> seeds, Timestamp seeded_at) {
    for (const auto& s : seeds) add_message(std::nullopt, s.category, s.text, MessageAuthor::Seed, seeded_at);
}

const Message& MessageBank::add_message(std::optional<std::string> scope, MessageCategory category, std::string text,
                                        MessageAuthor author, Timestamp created_at) {
    if (blank(text)) throw Error(ErrorCode::EmptyText);
    Message m;
    m.message_id = scope ? "p" + std::to_string(next_personal_++) : "g" + std::to_string(next_generic_++);
    m.participant_scope = std::move(scope);
    m.category = category;
    m.text = std::move(text);
    m.created_by = author;
    m.created_at = created_at;
    messages_.push_back(std::move(m));
    return messages_.back();
}

SelectedMessage MessageBank::select_message(const std::string& participant, MessageCategory category, Rng& rng,
                                            Timestamp now) {
    std::vector<const Message*> personal, generic;
    for (const auto& m : messages_) {
        if (m.category != category) continue;
        if (!m.participant_scope) {
            generic.push_back(&m);
        } else if (*m.participant_scope == participant) {
            personal.push_back(&m);
        }
    }
    if (generic.empty()) throw Error(ErrorCode::EmptyGenericPool, std::string(to_string(category)));

    // One pool draw per selection regardless of pool sizes keeps the stream aligned.
    const bool use_personal = rng.uniform01() < kPersonalizedShare && !personal.empty();
    const auto& pool = use_personal ? personal : generic;

    auto& shows = shows_[participant];
    const auto last_seq = [&](const Message* m) {
        const auto it = shows.by_message.find(m->message_id);
        return it == shows.by_message.end() ? std::uint64_t{0} : it->second.last_seq;
    };
    std::uint64_t oldest = UINT64_MAX;
    for (const auto* m : pool) oldest = std::min(oldest, last_seq(m));
    std::vector<const Message*> candidates;
    for (const auto* m : pool) {
        if (last_seq(m) == oldest) candidates.push_back(m);
    }
    const auto pick = candidates.size() == 1
                          ? candidates.front()
                          : candidates[static_cast<std::size_t>(
                                rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];

    auto& state = shows.by_message[pick->message_id];
    state.last_seq = ++shows.seq;
    ++state.count;
    return {*pick, use_personal ? MessagePool::Personalized : MessagePool::Generic, now};
}

std::vector<Message> MessageBank::personalized_for(const std::string& participant) const {
    std::vector<Message> out;
    for (const auto& m : messages_) {
        if (m.participant_scope && *m.participant_scope == participant) out.push_back(m);
    }
    return out;
}

std::uint64_t MessageBank::show_count(const std::string& participant, const std::string& message_id) const {
    const auto it = shows_.find(participant);
    if (it == shows_.end()) return 0;
    const auto jt = it->second.by_message.find(message_id);
    return jt == it->second.by_message.end() ? 0 : jt->second.count;
}

}  // namespace msite
