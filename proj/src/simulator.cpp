#include "traceguard/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace traceguard {

namespace {

constexpr const char* kShopPackage = "com.acme.webshop";

const SensorId kUserAgentSid{kRequestMarkerPackage, "Header", "userAgent", 0, kVidText, 0};
const SensorId kRemoteIpSid{kRequestMarkerPackage, "Header", "remoteIp", 0, kVidText, 0};

// Assigns each (class, method) a stable id so a method shared by several
// pages keeps one SID everywhere.
class MethodRegistry {
  public:
    SensorId sid(const std::string& cls, const std::string& method) {
        const std::string key = cls + "::" + method;
        auto [it, fresh] = ids_.try_emplace(key, next_);
        if (fresh) ++next_;
        return SensorId{kShopPackage, cls, method, static_cast<std::uint32_t>(it->second),
                        kVidNumeric64, 0};
    }

  private:
    std::map<std::string, std::int32_t> ids_;
    std::int32_t next_ = 1;
};

struct MethodSpec {
    const char* cls;
    const char* method;
    double base;
    double noise;
};

PageTemplate make_page(MethodRegistry& registry, const std::string& name,
                       std::initializer_list<MethodSpec> chain) {
    PageTemplate page;
    page.name = name;
    page.marker_sid = SensorId{kRequestMarkerPackage, kRequestMarkerClass, name, 0, kVidState32, 0};
    for (const MethodSpec& m : chain) {
        page.chain.push_back(MethodTemplate{registry.sid(m.cls, m.method), m.base, m.noise});
    }
    return page;
}

// Browsing pools per visitor kind. Logged-in visitors start with one login
// and then cycle their playlist; they never log in again mid-session.
const std::vector<std::string> kAnonPlaylist = {pages::kStartAnon, pages::kProducts,
                                                pages::kProductDetail, pages::kSearch,
                                                pages::kAbout};
const std::vector<std::string> kAuthPlaylist = {pages::kStartAuth, pages::kDashboard,
                                                pages::kProducts, pages::kProductDetail,
                                                pages::kSearch};

const std::vector<std::string> kBrowserAgents = {
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
    "Chrome/124.0 Safari/537.36",
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 13_4) AppleWebKit/605.1.15 (KHTML, like Gecko) "
    "Version/16.5 Safari/605.1.15",
    "Mozilla/5.0 (X11; Linux x86_64; rv:115.0) Gecko/20100101 Firefox/115.0",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:126.0) Gecko/20100101 Firefox/126.0",
    "Mozilla/5.0 (iPhone; CPU iPhone OS 16_5 like Mac OS X) AppleWebKit/605.1.15 (KHTML, "
    "like Gecko) Mobile/15E148",
    "Mozilla/5.0 (Linux; Android 13; Pixel 7) AppleWebKit/537.36 (KHTML, like Gecko) "
    "Chrome/123.0 Mobile Safari/537.36",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
    "Edge/122.0",
    "Mozilla/5.0 (X11; Ubuntu; Linux x86_64; rv:109.0) Gecko/20100101 Firefox/119.0",
};

struct PendingRequest {
    std::int64_t arrival_ms = 0;
    const PageTemplate* page = nullptr;
    std::string user_agent;
    std::string source_ip;
    std::vector<std::int64_t> durations;
};

const PageTemplate& require_page(const SiteModel& site, const std::string& name) {
    const PageTemplate* page = site.find(name);
    if (!page) throw std::invalid_argument("site has no page named '" + name + "'");
    return *page;
}

// One simulated visitor: personal RNG stream, shuffled playlist, next wakeup.
struct Visitor {
    DeterministicRandom rng;
    std::vector<const PageTemplate*> playlist;
    std::size_t cursor = 0;
    std::int64_t next_t = 0;
    std::string agent;
    std::string ip;
    bool pending_login = false;
    const PageTemplate* login_page = nullptr;

    Visitor(const ScenarioSpec& spec, const SiteModel& site, int index)
        : rng(spec.seed, 101 + static_cast<std::uint64_t>(index)) {
        const bool logged_in = index % 2 == 0;
        for (const std::string& name : logged_in ? kAuthPlaylist : kAnonPlaylist) {
            playlist.push_back(&require_page(site, name));
        }
        // Fisher-Yates with the visitor's own stream: personal page order.
        for (std::size_t i = playlist.size(); i > 1; --i) {
            std::swap(playlist[i - 1], playlist[rng.next_below(i)]);
        }
        const std::int64_t stagger = std::max<std::int64_t>(1, spec.think_ms / spec.users);
        next_t = static_cast<std::int64_t>(index) * stagger;
        agent = kBrowserAgents[static_cast<std::size_t>(index) % kBrowserAgents.size()];
        ip = "192.168.1." + std::to_string(10 + index);
        if (logged_in) {
            pending_login = true;
            login_page = &require_page(site, pages::kLoginOk);
        }
    }

    PendingRequest emit(const ScenarioSpec& spec) {
        PendingRequest request;
        request.arrival_ms = next_t;
        if (pending_login) {
            pending_login = false;
            request.page = login_page;
        } else {
            request.page = playlist[cursor % playlist.size()];
            ++cursor;
        }
        request.user_agent = agent;
        request.source_ip = ip;
        request.durations = realize_durations(*request.page, rng);
        std::int64_t think = spec.think_ms;
        if (spec.jitter_ms > 0) think += rng.next_int(-spec.jitter_ms, spec.jitter_ms);
        next_t += think;
        return request;
    }
};

std::vector<PendingRequest> generate_background(const ScenarioSpec& spec, const SiteModel& site) {
    std::vector<PendingRequest> pending;

    if (spec.page) {
        // Sequential replay of one page: the fingerprint-stability workload.
        const PageTemplate& page = require_page(site, *spec.page);
        DeterministicRandom rng(spec.seed, 101);
        std::int64_t t = 0;
        while (spec.request_budget
                   ? static_cast<std::int64_t>(pending.size()) < *spec.request_budget
                   : t < spec.duration_ms) {
            PendingRequest request;
            request.arrival_ms = t;
            request.page = &page;
            request.user_agent = kBrowserAgents[0];
            request.source_ip = "192.168.1.10";
            request.durations = realize_durations(page, rng);
            pending.push_back(std::move(request));
            std::int64_t think = spec.think_ms;
            if (spec.jitter_ms > 0) think += rng.next_int(-spec.jitter_ms, spec.jitter_ms);
            t += think;
        }
        return pending;
    }

    std::vector<Visitor> visitors;
    visitors.reserve(static_cast<std::size_t>(spec.users));
    for (int u = 0; u < spec.users; ++u) visitors.emplace_back(spec, site, u);

    // Virtual-time event queue: always advance the visitor whose next
    // request is earliest (ties go to the lower index), so interleaving is
    // deterministic and the output arrives already time-sorted.
    while (true) {
        Visitor* next = nullptr;
        for (Visitor& v : visitors) {
            if (!spec.request_budget && v.next_t >= spec.duration_ms) continue;
            if (!next || v.next_t < next->next_t) next = &v;
        }
        if (!next) break;
        if (spec.request_budget &&
            static_cast<std::int64_t>(pending.size()) >= *spec.request_budget) {
            break;
        }
        pending.push_back(next->emit(spec));
    }
    return pending;
}

struct AttackPlan {
    std::vector<PendingRequest> requests;
    AttackInterval interval;
};

AttackPlan generate_attack(const ScenarioSpec& spec, const SiteModel& site) {
    const PageTemplate& unknown = require_page(site, pages::kLoginUnknownUser);
    const PageTemplate& wrongpw = require_page(site, pages::kLoginWrongPassword);
    const PageTemplate& ok = require_page(site, pages::kLoginOk);

    DeterministicRandom rng(spec.seed, 7777);

    std::vector<std::string> agents;
    for (int i = 0; i < spec.attack_user_agents; ++i) {
        const std::string v = std::to_string(60 + i);
        agents.push_back("Mozilla/5.0 (X11; Linux x86_64; rv:" + v +
                         ".0) Gecko/20100101 Firefox/" + v + ".0");
    }
    std::vector<std::string> ips;
    for (int i = 0; i < spec.attack_ips; ++i) {
        ips.push_back("203.0.113." + std::to_string(1 + i));
    }

    // Outcome per dictionary entry. Probing: one valid username whose guess
    // fails on the password. Timing sweep: one successful login, a dozen
    // wrong-password hits, the rest unknown.
    std::vector<const PageTemplate*> outcomes(static_cast<std::size_t>(spec.dictionary_size),
                                              &unknown);
    if (spec.kind == ScenarioKind::probe) {
        outcomes[rng.next_below(outcomes.size())] = &wrongpw;
    } else {
        const std::size_t success = rng.next_below(outcomes.size());
        outcomes[success] = &ok;
        const std::size_t wrong_target =
            std::min<std::size_t>(12, outcomes.size() > 0 ? outcomes.size() - 1 : 0);
        std::set<std::size_t> wrong;
        while (wrong.size() < wrong_target) {
            const std::size_t candidate = rng.next_below(outcomes.size());
            if (candidate != success) wrong.insert(candidate);
        }
        for (std::size_t index : wrong) outcomes[index] = &wrongpw;
    }

    AttackPlan plan;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        PendingRequest request;
        request.arrival_ms =
            spec.attack_onset_ms +
            std::llround(static_cast<double>(k) * 1000.0 / spec.attack_rate_per_s);
        request.page = outcomes[k];
        request.user_agent = agents[rng.next_below(agents.size())];
        request.source_ip = ips[rng.next_below(ips.size())];
        request.durations = realize_durations(*request.page, rng);
        plan.requests.push_back(std::move(request));
    }
    plan.interval.onset_ms = plan.requests.front().arrival_ms;
    plan.interval.end_ms = plan.requests.back().arrival_ms;
    plan.interval.kind = spec.kind == ScenarioKind::probe ? "probe" : "timing";
    return plan;
}

std::vector<SensorEvent> emit_events(std::vector<PendingRequest> requests) {
    std::stable_sort(requests.begin(), requests.end(),
                     [](const PendingRequest& a, const PendingRequest& b) {
                         return a.arrival_ms < b.arrival_ms;
                     });
    std::vector<SensorEvent> events;
    std::int64_t prev_ts = -1;
    std::uint32_t count = 0;
    for (std::size_t ordinal = 0; ordinal < requests.size(); ++ordinal) {
        const PendingRequest& request = requests[ordinal];
        if (request.arrival_ms != prev_ts) {
            prev_ts = request.arrival_ms;
            count = 0;
        }
        auto push = [&](const SensorId& sid, SensorValue value) {
            events.push_back(
                SensorEvent{request.arrival_ms, count++, sid, std::move(value)});
        };
        push(request.page->marker_sid,
             SensorValue::state(static_cast<std::int32_t>(ordinal)));
        push(kUserAgentSid, SensorValue::text(request.user_agent));
        push(kRemoteIpSid, SensorValue::text(request.source_ip));
        for (std::size_t i = 0; i < request.page->chain.size(); ++i) {
            const std::int64_t duration = request.durations[i];
            if (duration < 1) continue;  // below timestamp resolution: suppressed
            push(request.page->chain[i].sid,
                 SensorValue::numeric(static_cast<double>(duration)));
        }
    }
    return events;
}

}  // namespace

const PageTemplate* SiteModel::find(std::string_view name) const {
    for (const PageTemplate& page : pages) {
        if (page.name == name) return &page;
    }
    return nullptr;
}

void SiteModel::validate() const {
    if (pages.empty()) throw std::invalid_argument("site has no pages");
    std::set<std::string> names;
    for (const PageTemplate& page : pages) {
        if (page.name.empty()) throw std::invalid_argument("page name must be non-empty");
        if (!names.insert(page.name).second) {
            throw std::invalid_argument("duplicate page name '" + page.name + "'");
        }
        if (page.chain.empty()) {
            throw std::invalid_argument("page '" + page.name + "' has an empty chain");
        }
        if (page.marker_sid.vid != kVidState32) {
            throw std::invalid_argument("page '" + page.name + "' marker must be State32");
        }
        for (const MethodTemplate& method : page.chain) {
            if (method.base_duration_ms < 1.0) {
                throw std::invalid_argument("method " + to_string(method.sid) +
                                            " base duration must be >= 1 ms");
            }
            if (method.noise_ms < 0.0) {
                throw std::invalid_argument("method " + to_string(method.sid) +
                                            " noise must be non-negative");
            }
        }
    }
}

SiteModel default_site() {
    // All base durations sit at 1 mod 3, so the +/-1 ms noise can never cross
    // a 3 ms bucket boundary: every page maps to exactly one fingerprint
    // class. The two start pages differ only in fetchArticles (+51 ms for
    // the logged-in variant), and their per-request total noise is capped at
    // +/-5 ms by keeping the tail methods noise-free.
    MethodRegistry registry;
    SiteModel site;
    site.pages.push_back(make_page(registry, pages::kStartAnon,
                                   {{"Frontpage", "fetchArticles", 187, 1},
                                    {"Frontpage", "fetchTeasers", 142, 1},
                                    {"Catalog", "loadFeatured", 121, 1},
                                    {"Frontpage", "renderArticles", 94, 1},
                                    {"Session", "touch", 76, 1},
                                    {"Catalog", "loadPrices", 58, 0},
                                    {"Frontpage", "renderSidebar", 49, 0},
                                    {"Http", "compress", 40, 0},
                                    {"Http", "flush", 31, 0}}));
    site.pages.push_back(make_page(registry, pages::kStartAuth,
                                   {{"Frontpage", "fetchArticles", 238, 1},
                                    {"Frontpage", "fetchTeasers", 142, 1},
                                    {"Catalog", "loadFeatured", 121, 1},
                                    {"Frontpage", "renderArticles", 94, 1},
                                    {"Session", "touch", 76, 1},
                                    {"Catalog", "loadPrices", 58, 0},
                                    {"Frontpage", "renderSidebar", 49, 0},
                                    {"Http", "compress", 40, 0},
                                    {"Http", "flush", 31, 0}}));
    site.pages.push_back(make_page(registry, pages::kLoginOk,
                                   {{"Auth", "lookupUser", 40, 1},
                                    {"Auth", "hashPassword", 94, 1},
                                    {"Auth", "createSession", 22, 1},
                                    {"Auth", "loadProfile", 55, 1},
                                    {"Http", "renderRedirect", 7, 1}}));
    site.pages.push_back(make_page(registry, pages::kLoginWrongPassword,
                                   {{"Auth", "lookupUser", 40, 1},
                                    {"Auth", "hashPassword", 94, 1},
                                    {"Auth", "rejectPassword", 13, 1},
                                    {"Http", "renderError", 10, 1}}));
    site.pages.push_back(make_page(registry, pages::kLoginUnknownUser,
                                   {{"Auth", "lookupUser", 40, 1},
                                    {"Auth", "rejectUnknown", 13, 1},
                                    {"Http", "renderError", 10, 1}}));
    site.pages.push_back(make_page(registry, pages::kDashboard,
                                   {{"Dashboard", "loadOrders", 76, 1},
                                    {"Dashboard", "loadRecommendations", 103, 1},
                                    {"Dashboard", "renderWidgets", 58, 1},
                                    {"Dashboard", "renderFooter", 25, 1}}));
    site.pages.push_back(make_page(registry, pages::kProducts,
                                   {{"Catalog", "queryProducts", 94, 1},
                                    {"Catalog", "loadStock", 67, 1},
                                    {"Catalog", "renderGrid", 46, 1},
                                    {"Catalog", "renderPaging", 28, 1},
                                    {"Http", "etag", 16, 1}}));
    site.pages.push_back(make_page(registry, pages::kProductDetail,
                                   {{"Catalog", "loadProduct", 58, 1},
                                    {"Catalog", "loadReviews", 37, 1},
                                    {"Catalog", "renderDetail", 22, 1},
                                    {"Catalog", "renderRelated", 13, 1}}));
    site.pages.push_back(make_page(registry, pages::kSearch,
                                   {{"Search", "query", 112, 1},
                                    {"Search", "rank", 34, 1},
                                    {"Search", "renderResults", 19, 1}}));
    site.pages.push_back(make_page(registry, pages::kAbout,
                                   {{"Static", "loadPage", 31, 1},
                                    {"Static", "render", 10, 1}}));
    return site;
}

void ScenarioSpec::validate() const {
    if (users < 1) throw std::invalid_argument("at least one user required");
    if (think_ms < 1) throw std::invalid_argument("think time must be positive");
    if (jitter_ms < 0 || jitter_ms >= think_ms) {
        throw std::invalid_argument("jitter must be non-negative and below the think time");
    }
    if (request_budget && *request_budget < 1) {
        throw std::invalid_argument("request budget must be positive");
    }
    if (!request_budget && duration_ms < 1) {
        throw std::invalid_argument("duration must be positive");
    }
    if (page && page->empty()) throw std::invalid_argument("page name must be non-empty");
    if (kind != ScenarioKind::normal) {
        if (dictionary_size < 1) throw std::invalid_argument("dictionary must be non-empty");
        if (!(attack_rate_per_s > 0.0)) throw std::invalid_argument("rate must be positive");
        if (attack_onset_ms < 0) throw std::invalid_argument("onset must be non-negative");
        if (attack_user_agents < 1 || attack_ips < 1) {
            throw std::invalid_argument("attack needs at least one agent and one IP");
        }
        const std::int64_t burst =
            std::llround(static_cast<double>(dictionary_size - 1) * 1000.0 / attack_rate_per_s);
        if (!request_budget && attack_onset_ms + burst >= duration_ms) {
            throw std::invalid_argument("attack does not fit inside the scenario duration");
        }
        if (page) throw std::invalid_argument("single-page replay only supports normal runs");
    }
}

std::vector<std::int64_t> realize_durations(const PageTemplate& page, DeterministicRandom& rng) {
    std::vector<std::int64_t> out;
    out.reserve(page.chain.size());
    for (const MethodTemplate& method : page.chain) {
        double value = method.base_duration_ms;
        if (method.noise_ms > 0.0) {
            value += (2.0 * rng.next_unit() - 1.0) * method.noise_ms;
        }
        out.push_back(std::llround(value));
    }
    return out;
}

std::optional<std::string> trace_page(const RequestTrace& trace) {
    for (const SensorEvent& event : trace.events) {
        if (event.sid.package == kRequestMarkerPackage &&
            event.sid.class_name == kRequestMarkerClass) {
            return event.sid.method;
        }
    }
    return std::nullopt;
}

SimulationResult simulate(const ScenarioSpec& spec) { return simulate(spec, default_site()); }

SimulationResult simulate(const ScenarioSpec& spec, const SiteModel& site) {
    spec.validate();
    site.validate();

    std::vector<PendingRequest> pending = generate_background(spec, site);
    SimulationResult result;
    if (spec.kind != ScenarioKind::normal) {
        AttackPlan plan = generate_attack(spec, site);
        pending.insert(pending.end(), std::make_move_iterator(plan.requests.begin()),
                       std::make_move_iterator(plan.requests.end()));
        result.truth.intervals.push_back(plan.interval);
    }
    result.events = emit_events(std::move(pending));
    return result;
}

std::string format_truth(const GroundTruth& truth) {
    std::string out;
    for (const AttackInterval& interval : truth.intervals) {
        out += std::to_string(interval.onset_ms);
        out += '\t';
        out += std::to_string(interval.end_ms);
        out += '\t';
        out += interval.kind;
        out += '\n';
    }
    return out;
}

GroundTruth parse_truth(std::istream& in) {
    GroundTruth truth;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto context = [&] {
            return "ground truth line " + std::to_string(line_number);
        };
        const std::size_t first = line.find('\t');
        const std::size_t second = first == std::string::npos
                                       ? std::string::npos
                                       : line.find('\t', first + 1);
        if (second == std::string::npos) {
            throw std::runtime_error(context() + ": expected onset<TAB>end<TAB>kind");
        }
        const auto parse_ms = [&](const std::string& text) {
            std::size_t used = 0;
            std::int64_t value = 0;
            try {
                value = std::stoll(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (text.empty() || used != text.size() || value < 0) {
                throw std::runtime_error(context() + ": bad interval bounds");
            }
            return value;
        };
        AttackInterval interval;
        interval.onset_ms = parse_ms(line.substr(0, first));
        interval.end_ms = parse_ms(line.substr(first + 1, second - first - 1));
        interval.kind = line.substr(second + 1);
        if (interval.kind.empty()) throw std::runtime_error(context() + ": empty kind");
        if (interval.end_ms < interval.onset_ms) {
            throw std::runtime_error(context() + ": interval ends before it starts");
        }
        truth.intervals.push_back(std::move(interval));
    }
    return truth;
}

GroundTruth read_truth_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ground truth file: " + path.string());
    return parse_truth(in);
}

void write_simulation(const SimulationResult& result, const std::filesystem::path& log_path) {
    {
        std::ofstream out(log_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write log file: " + log_path.string());
        std::string buffer;
        for (const SensorEvent& event : result.events) {
            buffer += format_event(event);
            buffer += '\n';
        }
        out << buffer;
        if (!out) throw std::runtime_error("failed writing log file: " + log_path.string());
    }
    const std::filesystem::path truth_path(log_path.string() + ".truth");
    std::ofstream out(truth_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write truth file: " + truth_path.string());
    out << format_truth(result.truth);
    if (!out) throw std::runtime_error("failed writing truth file: " + truth_path.string());
}

}  // namespace traceguard
