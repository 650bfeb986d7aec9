#include "msite/ema.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "msite/error.hpp"

namespace msite {

namespace {

using nlohmann::json;

constexpr std::string_view kDefaultBank = R"jsonl({"script_id":"action_plan","kind":"ActionPlan","role":"action_plan","nodes":[{"id":"plan","role":"plan","prompt":"What would you like to do today?","answer":{"type":"choice","options":["Interact with someone","Fun activity out of home","Goal step","Custom goal"]},"branches":{"Custom goal":"custom"},"next":"encourage"},{"id":"custom","prompt":"What is your goal for today?","answer":{"type":"text"},"next":"encourage"},{"id":"encourage","role":"encourage","prompt":"You can do it!","answer":{"type":"choice","options":["OK"]}}]}
{"script_id":"threat_appraisal","kind":"Contextual","role":"threat_appraisal","nodes":[{"id":"threat_anxious","role":"appraisal","prompt":"How anxious do you feel about leaving home right now?","answer":{"type":"slider","min":1,"max":7}},{"id":"threat_harm","role":"appraisal","prompt":"How likely is it that something bad would happen if you went out?","answer":{"type":"slider","min":1,"max":7}},{"id":"threat_avoid","role":"appraisal","prompt":"How much do you want to avoid other people today?","answer":{"type":"slider","min":1,"max":7}}]}
{"script_id":"defeatist_appraisal","kind":"Contextual","role":"defeatist_appraisal","nodes":[{"id":"defeat_judged","role":"appraisal","prompt":"How much do you think others would judge you negatively?","answer":{"type":"slider","min":1,"max":7}},{"id":"defeat_badly","role":"appraisal","prompt":"How likely is it that a conversation would go badly?","answer":{"type":"slider","min":1,"max":7}},{"id":"defeat_worth","role":"appraisal","prompt":"How much do you feel it is not worth trying to talk to people?","answer":{"type":"slider","min":1,"max":7}}]}
{"script_id":"savor","kind":"Contextual","role":"savor","nodes":[{"id":"savor","role":"savor","prompt":"Take a moment to savor the time you spent with others. Write about it or take a photo.","answer":{"type":"text_or_photo"}}]}
{"script_id":"burst","kind":"Burst","role":"burst","nodes":[{"id":"pleasure","role":"burst","prompt":"How much pleasure or enjoyment did you feel in the interactions?","answer":{"type":"slider","min":1,"max":7}},{"id":"interest_past_hour","role":"burst","prompt":"In the past hour, how much interest or motivation did you have for interacting with others?","answer":{"type":"slider","min":1,"max":7}},{"id":"interest_later_today","role":"burst","prompt":"How much interest or motivation do you have for engaging in interactions later today?","answer":{"type":"slider","min":1,"max":7}},{"id":"defeatist_attitudes","role":"burst","prompt":"How much do you agree: if I talk to people, they will think less of me?","answer":{"type":"slider","min":1,"max":7}},{"id":"home_minutes","role":"burst","prompt":"In the past hour, about how much time did you spend at home?","answer":{"type":"minutes","min":0,"max":60}}]}
)jsonl";

const std::vector<std::string> kConfirmOptions{"Yes", "No", "Skip"};
const std::vector<std::string> kYesNo{"Yes", "No"};

AnswerSpec parse_answer_spec(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "choice") return AnswerSpec::choice(j.at("options").get<std::vector<std::string>>());
    if (type == "slider") return AnswerSpec::slider(j.value("min", 1), j.value("max", 7));
    if (type == "minutes") return {AnswerType::Minutes, {}, j.value("min", 0), j.value("max", 60)};
    if (type == "text") return AnswerSpec::text();
    if (type == "photo") return {AnswerType::PhotoRef, {}, 0, 0};
    if (type == "text_or_photo") return AnswerSpec::text_or_photo();
    throw Error(ErrorCode::InvalidConfig, "unknown answer type " + type);
}

ScriptNode parse_node(const json& j) {
    ScriptNode n;
    n.node_id = j.at("id").get<std::string>();
    n.prompt = j.at("prompt").get<std::string>();
    n.answer = parse_answer_spec(j.at("answer"));
    n.role = j.value("role", std::string{});
    if (j.contains("branches")) n.branches = j.at("branches").get<std::map<std::string, std::string>>();
    if (j.contains("next")) n.next = j.at("next").get<std::string>();
    return n;
}

std::string context_key(SocialContext c) {
    std::string key = c.location == Location::Home ? "home_" : "away_";
    key += c.company == Company::Alone ? "alone" : "others";
    return key;
}

void chain_linear(std::vector<ScriptNode>& nodes) {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        nodes[i].branches.clear();
        nodes[i].next = nodes[i + 1].node_id;
    }
    if (!nodes.empty()) {
        nodes.back().branches.clear();
        nodes.back().next.reset();
    }
}

// Node awaiting an answer given the answers so far, ignoring session state.
std::optional<std::string> frontier(const EmaSession& s) {
    if (s.script.nodes.empty()) return std::nullopt;
    if (s.answers.empty()) return s.script.entry().node_id;
    const auto& last = s.answers.back();
    const auto* node = s.script.find(last.node_id);
    if (node == nullptr) return std::nullopt;
    return next_node(*node, last.value);
}

const Answer* answer_for_role(const EmaSession& s, std::string_view role) {
    for (const auto& a : s.answers) {
        const auto* node = s.script.find(a.node_id);
        if (node != nullptr && node->role == role) return &a;
    }
    return nullptr;
}

}  // namespace

std::string_view to_string(ScriptKind k) noexcept {
    switch (k) {
        case ScriptKind::ActionPlan: return "ActionPlan";
        case ScriptKind::Contextual: return "Contextual";
        case ScriptKind::Burst: return "Burst";
    }
    return "ActionPlan";
}

std::optional<ScriptKind> parse_script_kind(std::string_view text) {
    if (text == "ActionPlan") return ScriptKind::ActionPlan;
    if (text == "Contextual") return ScriptKind::Contextual;
    if (text == "Burst") return ScriptKind::Burst;
    return std::nullopt;
}

std::string to_string(const AnswerValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return std::get<std::string>(v);
}

std::string_view to_string(Slot s) noexcept {
    switch (s) {
        case Slot::Morning: return "Morning";
        case Slot::Noon: return "Noon";
        case Slot::Evening: return "Evening";
    }
    return "Morning";
}

std::string_view to_string(SessionState s) noexcept {
    switch (s) {
        case SessionState::Delivered: return "Delivered";
        case SessionState::InProgress: return "InProgress";
        case SessionState::Completed: return "Completed";
        case SessionState::Expired: return "Expired";
    }
    return "Delivered";
}

const ScriptNode* EmaScript::find(std::string_view node_id) const noexcept {
    for (const auto& n : nodes) {
        if (n.node_id == node_id) return &n;
    }
    return nullptr;
}

void EmaScript::validate() const {
    if (nodes.empty()) throw Error(ErrorCode::InvalidScript, script_id + ": no nodes");
    std::set<std::string> ids;
    for (const auto& n : nodes) {
        if (n.node_id.empty() || !ids.insert(n.node_id).second) {
            throw Error(ErrorCode::InvalidScript, script_id + ": duplicate or empty node id '" + n.node_id + "'");
        }
    }
    const auto targets = [](const ScriptNode& n) {
        std::vector<std::string> out;
        for (const auto& [answer, target] : n.branches) out.push_back(target);
        if (n.next) out.push_back(*n.next);
        return out;
    };
    for (const auto& n : nodes) {
        for (const auto& t : targets(n)) {
            if (!ids.contains(t)) throw Error(ErrorCode::InvalidScript, script_id + ": missing branch target " + t);
        }
        if (n.answer.type == AnswerType::Choice) {
            for (const auto& [answer, target] : n.branches) {
                if (std::find(n.answer.options.begin(), n.answer.options.end(), answer) == n.answer.options.end()) {
                    throw Error(ErrorCode::InvalidScript, script_id + ": branch on unknown option " + answer);
                }
            }
        }
    }
    // DFS colouring from the entry: grey on the stack, black when finished.
    std::map<std::string, int> colour;
    std::function<void(const ScriptNode&)> visit = [&](const ScriptNode& n) {
        colour[n.node_id] = 1;
        for (const auto& t : targets(n)) {
            const int c = colour[t];
            if (c == 1) throw Error(ErrorCode::InvalidScript, script_id + ": cycle through " + t);
            if (c == 0) visit(*find(t));
        }
        colour[n.node_id] = 2;
    };
    visit(nodes.front());
    for (const auto& n : nodes) {
        if (colour[n.node_id] != 2) throw Error(ErrorCode::InvalidScript, script_id + ": unreachable node " + n.node_id);
    }
}

std::optional<std::string> next_node(const ScriptNode& node, const AnswerValue& value) {
    if (const auto it = node.branches.find(to_string(value)); it != node.branches.end()) return it->second;
    return node.next;
}

bool in_domain(const AnswerSpec& spec, const AnswerValue& value) {
    switch (spec.type) {
        case AnswerType::Choice: {
            const auto* s = std::get_if<std::string>(&value);
            return s != nullptr && std::find(spec.options.begin(), spec.options.end(), *s) != spec.options.end();
        }
        case AnswerType::Slider:
        case AnswerType::Minutes: {
            const auto* i = std::get_if<std::int64_t>(&value);
            return i != nullptr && *i >= spec.min && *i <= spec.max;
        }
        case AnswerType::FreeText:
        case AnswerType::PhotoRef:
        case AnswerType::TextOrPhoto: {
            const auto* s = std::get_if<std::string>(&value);
            return s != nullptr && s->find_first_not_of(" \t\r\n") != std::string::npos;
        }
    }
    return false;
}

ItemBank parse_item_bank(std::string_view jsonl) {
    ItemBank bank;
    bool have_plan = false, have_savor = false;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        const auto line = jsonl.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto record = json::parse(line);
            const auto role = record.at("role").get<std::string>();
            std::vector<ScriptNode> nodes;
            for (const auto& n : record.at("nodes")) nodes.push_back(parse_node(n));
            if (role == "action_plan") {
                bank.action_plan.script_id = record.at("script_id").get<std::string>();
                bank.action_plan.kind = ScriptKind::ActionPlan;
                bank.action_plan.nodes = std::move(nodes);
                bank.action_plan.validate();
                have_plan = true;
            } else if (role == "threat_appraisal") {
                bank.threat_items = std::move(nodes);
            } else if (role == "defeatist_appraisal") {
                bank.defeatist_items = std::move(nodes);
            } else if (role == "savor") {
                bank.savor = nodes.at(0);
                have_savor = true;
            } else if (role == "burst") {
                for (const auto& n : nodes) {
                    if (n.answer.type != AnswerType::Slider && n.answer.type != AnswerType::Minutes) {
                        throw Error(ErrorCode::InvalidConfig, "burst items are sliders or minutes");
                    }
                    bank.burst_items.push_back({n.node_id, n.prompt,
                                                n.answer.type == AnswerType::Slider ? BurstDomain::Slider
                                                                                    : BurstDomain::Minutes});
                }
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown role " + role);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, "script bank line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_plan || !have_savor || bank.threat_items.empty() || bank.defeatist_items.empty()) {
        throw Error(ErrorCode::InvalidConfig, "script bank needs action_plan, savor and both appraisal sets");
    }
    return bank;
}

const ItemBank& default_item_bank() {
    static const ItemBank bank = parse_item_bank(kDefaultBank);
    return bank;
}

void DailySchedule::validate() const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        if (s.fire_at < Seconds{0} || s.fire_at >= kDay) throw Error(ErrorCode::InvalidConfig, "fire time outside day");
        if (i > 0 && !(slots[i - 1].fire_at < s.fire_at)) {
            throw Error(ErrorCode::InvalidConfig, "slot times must increase");
        }
        if (s.kind == ScriptKind::Contextual && !(s.window_from < s.fire_at)) {
            throw Error(ErrorCode::InvalidConfig, "contextual window must precede its fire time");
        }
    }
    if (expire_after <= Seconds{0}) throw Error(ErrorCode::InvalidConfig, "expire_after must be positive");
}

bool Enrollment::burst_on(LocalDate d) const {
    if (!active_on(d)) return false;
    const int week = days_between(start, d) / 7;
    return std::find(burst_weeks.begin(), burst_weeks.end(), week) != burst_weeks.end();
}

std::vector<PendingPrompt> schedule_day(const Enrollment& enrollment, LocalDate date, const DailySchedule& schedule,
                                        bool burst_week) {
    if (!enrollment.active_on(date)) {
        throw Error(ErrorCode::InactiveParticipant, enrollment.participant_id + " on " + format_date(date));
    }
    std::vector<PendingPrompt> out;
    constexpr Slot kSlots[] = {Slot::Morning, Slot::Noon, Slot::Evening};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& spec = schedule.slots[i];
        PendingPrompt p;
        p.participant_id = enrollment.participant_id;
        p.date = date;
        p.slot = kSlots[i];
        p.kind = spec.kind;
        p.fire_at = at_local(date, spec.fire_at, enrollment.offset);
        if (spec.kind == ScriptKind::Contextual) {
            p.window = TimeWindow{at_local(date, spec.window_from, enrollment.offset), p.fire_at};
        }
        p.period_phrase = spec.period_phrase;
        p.burst = burst_week;
        out.push_back(std::move(p));
    }
    return out;
}

std::string confirm_prompt(SocialContext detected, std::string_view period) {
    const std::string where = detected.location == Location::Home ? "home" : "away from home";
    const std::string who = detected.company == Company::WithOthers ? "around other people" : "alone";
    return "I think you have been " + where + " and " + who + " in the " + std::string(period) + "; am I right?";
}

std::string fallback_prompt(std::string_view period) {
    return "Sorry that we got it wrong! Were you around others this " + std::string(period) + "?";
}

std::string direct_ask_prompt(std::string_view period) {
    return "Were you around others this " + std::string(period) + "?";
}

EmaScript build_contextual_session(const SocialContextWindow& window, std::string_view period_phrase,
                                   const SelectedMessage& message, const std::optional<SelectedMessage>& alternate,
                                   const std::optional<SelectedMessage>& savor_message, const ItemBank& bank,
                                   std::string script_id) {
    const auto detected_category = category_for_context(window.detected);
    if (message.message.category != detected_category) {
        throw Error(ErrorCode::CategoryMismatch, std::string(to_string(message.message.category)) + " for " +
                                                     to_string(window.detected));
    }

    EmaScript script;
    script.script_id = std::move(script_id);
    script.kind = ScriptKind::Contextual;

    std::vector<SocialContext> chains;
    const auto chain_entry = [&](SocialContext ctx) {
        if (std::find(chains.begin(), chains.end(), ctx) == chains.end()) chains.push_back(ctx);
        const auto& items = ctx == SocialContext{Location::Home, Company::Alone} ? bank.threat_items
                                                                                : bank.defeatist_items;
        return context_key(ctx) + "." + items.front().node_id;
    };

    const auto location = window.detected.location;
    const SocialContext with_others{location, Company::WithOthers};
    const SocialContext alone{location, Company::Alone};

    if (window.basis == Basis::Sensed) {
        ScriptNode confirm;
        confirm.node_id = "confirm";
        confirm.role = node_role::kConfirm;
        confirm.prompt = confirm_prompt(window.detected, period_phrase);
        confirm.answer = AnswerSpec::choice(kConfirmOptions);
        const auto detected_entry = chain_entry(window.detected);
        confirm.branches = {{"Yes", detected_entry}, {"Skip", detected_entry}, {"No", "fallback"}};
        script.nodes.push_back(std::move(confirm));

        ScriptNode fallback;
        fallback.node_id = "fallback";
        fallback.role = node_role::kFallback;
        fallback.prompt = fallback_prompt(period_phrase);
        fallback.answer = AnswerSpec::choice(kYesNo);
        fallback.branches = {{"Yes", chain_entry(with_others)}, {"No", chain_entry(alone)}};
        script.nodes.push_back(std::move(fallback));
    } else {
        ScriptNode ask;
        ask.node_id = "direct_ask";
        ask.role = node_role::kDirectAsk;
        ask.prompt = direct_ask_prompt(period_phrase);
        ask.answer = AnswerSpec::choice(kYesNo);
        ask.branches = {{"Yes", chain_entry(with_others)}, {"No", chain_entry(alone)}};
        script.nodes.push_back(std::move(ask));
    }

    for (const auto ctx : chains) {
        const bool threat = ctx == SocialContext{Location::Home, Company::Alone};
        const auto key = context_key(ctx);
        std::vector<ScriptNode> chain;
        const auto& items = threat ? bank.threat_items : bank.defeatist_items;
        for (const auto& item : items) {
            ScriptNode n = item;
            n.node_id = key + "." + item.node_id;
            n.role = node_role::kAppraisal;
            chain.push_back(std::move(n));
        }
        const auto category = category_for_context(ctx);
        const SelectedMessage* shown = nullptr;
        if (category == message.message.category) {
            shown = &message;
        } else if (alternate && alternate->message.category == category) {
            shown = &*alternate;
        } else {
            throw Error(ErrorCode::CategoryMismatch,
                        "no " + std::string(to_string(category)) + " message for corrected context " + to_string(ctx));
        }
        ScriptNode challenge;
        challenge.node_id = key + ".challenge";
        challenge.role = node_role::kChallenge;
        challenge.prompt = shown->message.text;
        challenge.answer = AnswerSpec::choice({"OK"});
        challenge.message_id = shown->message.message_id;
        challenge.message_category = shown->message.category;
        chain.push_back(std::move(challenge));
        if (ctx.company == Company::WithOthers) {
            ScriptNode savor = bank.savor;
            savor.node_id = key + ".savor";
            savor.role = node_role::kSavor;
            if (savor_message) {
                savor.prompt += " " + savor_message->message.text;
                savor.message_id = savor_message->message.message_id;
                savor.message_category = savor_message->message.category;
            }
            chain.push_back(std::move(savor));
        }
        chain_linear(chain);
        for (auto& n : chain) script.nodes.push_back(std::move(n));
    }
    script.validate();
    return script;
}

EmaScript build_action_plan_session(const ItemBank& bank, const std::optional<SelectedMessage>& encouragement,
                                    std::string script_id) {
    EmaScript script = bank.action_plan;
    script.script_id = std::move(script_id);
    if (encouragement) {
        for (auto& n : script.nodes) {
            if (n.role == node_role::kEncourage) {
                n.prompt = encouragement->message.text;
                n.message_id = encouragement->message.message_id;
                n.message_category = encouragement->message.category;
            }
        }
    }
    script.validate();
    return script;
}

void append_burst_items(EmaScript& script, std::span<const BurstItem> items) {
    if (items.empty()) return;
    std::vector<ScriptNode> burst;
    for (const auto& item : items) {
        ScriptNode n;
        n.node_id = "burst." + item.item_id;
        n.role = node_role::kBurst;
        n.prompt = item.prompt;
        n.answer = item.spec();
        n.item_id = item.item_id;
        burst.push_back(std::move(n));
    }
    chain_linear(burst);
    for (auto& n : script.nodes) {
        if (n.terminal()) n.next = burst.front().node_id;
    }
    for (auto& n : burst) script.nodes.push_back(std::move(n));
    script.validate();
}

std::optional<std::string> EmaSession::current_node() const {
    if (state == SessionState::Completed || state == SessionState::Expired) return std::nullopt;
    return frontier(*this);
}

EmaSession deliver(std::string session_id, const PendingPrompt& prompt, EmaScript script, Timestamp delivered_at,
                   Seconds expire_after) {
    EmaSession s;
    s.session_id = std::move(session_id);
    s.participant_id = prompt.participant_id;
    s.script = std::move(script);
    s.slot = prompt.slot;
    s.date = prompt.date;
    s.delivered_at = delivered_at;
    s.expires_at = delivered_at + expire_after;
    s.state = SessionState::Delivered;
    return s;
}

EmaSession advance(EmaSession session, std::string_view node_id, const AnswerValue& value, Timestamp at) {
    if (session.state == SessionState::Expired || at >= session.expires_at) {
        throw Error(ErrorCode::SessionExpired, session.session_id);
    }
    const auto current = session.current_node();
    if (!current || *current != node_id) {
        throw Error(ErrorCode::WrongNode, session.session_id + ": expected " + current.value_or("<none>") + ", got " +
                                              std::string(node_id));
    }
    const auto* node = session.script.find(node_id);
    if (!in_domain(node->answer, value)) {
        throw Error(ErrorCode::ValueOutOfDomain, std::string(node_id) + " = " + to_string(value));
    }
    session.answers.push_back({std::string(node_id), value, at});
    session.state = next_node(*node, value) ? SessionState::InProgress : SessionState::Completed;
    return session;
}

bool expire_if_due(EmaSession& session, Timestamp now) {
    if ((session.state == SessionState::Delivered || session.state == SessionState::InProgress) &&
        now >= session.expires_at) {
        session.state = SessionState::Expired;
        return true;
    }
    return false;
}

Confirmation confirmation_of(const EmaSession& session) {
    const auto* a = answer_for_role(session, node_role::kConfirm);
    if (a == nullptr) return Confirmation::NoAnswer;
    const auto text = to_string(a->value);
    if (text == "Yes") return Confirmation::Yes;
    if (text == "No") return Confirmation::No;
    return Confirmation::NoAnswer;
}

std::optional<ContextResolution> resolution_of(const EmaSession& session) {
    if (session.kind() != ScriptKind::Contextual || !session.window) return std::nullopt;
    const auto detected = session.window->detected;
    const auto company_from = [](const Answer& a) {
        return to_string(a.value) == "Yes" ? Company::WithOthers : Company::Alone;
    };
    if (const auto* ask = answer_for_role(session, node_role::kDirectAsk)) {
        ContextResolution r;
        r.detected = detected;
        r.confirmed = Confirmation::NoAnswer;
        r.corrected_company = company_from(*ask);
        r.effective = {detected.location, *r.corrected_company};
        return r;
    }
    const auto* confirm = answer_for_role(session, node_role::kConfirm);
    if (confirm == nullptr) {
        if (session.state == SessionState::Expired) return reconcile(detected, Confirmation::NoAnswer, std::nullopt);
        return std::nullopt;
    }
    const auto c = confirmation_of(session);
    if (c != Confirmation::No) return reconcile(detected, c, std::nullopt);
    const auto* fallback = answer_for_role(session, node_role::kFallback);
    if (fallback == nullptr) return std::nullopt;
    return reconcile(detected, Confirmation::No, company_from(*fallback));
}

std::vector<SelectedMessage> shown_messages(const EmaSession& session) {
    std::vector<std::string> reached;
    for (const auto& a : session.answers) reached.push_back(a.node_id);
    if (const auto f = frontier(session)) reached.push_back(*f);
    std::vector<SelectedMessage> out;
    for (const auto& id : reached) {
        const auto* node = session.script.find(id);
        if (node == nullptr || !node->message_id) continue;
        for (const auto& d : session.drawn) {
            if (d.message.message_id == *node->message_id) {
                out.push_back(d);
                break;
            }
        }
    }
    return out;
}

std::optional<ActionPlanChoice> action_plan_choice(const EmaSession& session) {
    const auto* plan = answer_for_role(session, node_role::kPlan);
    if (plan == nullptr) return std::nullopt;
    const auto* node = session.script.find(plan->node_id);
    const auto text = to_string(plan->value);
    const auto& options = node->answer.options;
    const auto idx = std::find(options.begin(), options.end(), text) - options.begin();
    ActionPlanChoice choice;
    switch (idx) {
        case 0: choice.kind = ActionPlanChoiceKind::InteractWithSomeone; break;
        case 1: choice.kind = ActionPlanChoiceKind::FunActivityOutOfHome; break;
        case 2: choice.kind = ActionPlanChoiceKind::GoalStep; break;
        default: {
            choice.kind = ActionPlanChoiceKind::CustomGoal;
            const auto next = next_node(*node, plan->value);
            for (const auto& a : session.answers) {
                if (next && a.node_id == *next) choice.custom_text = to_string(a.value);
            }
            if (choice.custom_text.empty()) return std::nullopt;
        }
    }
    return choice;
}

std::vector<BurstAnswer> burst_answers(const EmaSession& session) {
    std::vector<BurstAnswer> out;
    for (const auto& a : session.answers) {
        const auto* node = session.script.find(a.node_id);
        if (node == nullptr || node->role != node_role::kBurst || !node->item_id) continue;
        if (const auto* v = std::get_if<std::int64_t>(&a.value)) {
            out.push_back({session.participant_id, *node->item_id, *v, a.answered_at});
        }
    }
    return out;
}

}  // namespace msite
