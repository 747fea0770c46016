// Acceptance gate: every release-blocking behavior checked in one
// binary, one [PASS]/[FAIL] line each, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "oracles.hpp"
#include "pforge/datasets.hpp"
#include "pforge/runner.hpp"

using namespace pforge;
namespace fs = std::filesystem;

namespace {

const fs::path kRepoDir = PFORGE_REPO_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path fresh_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("pforge-accept-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_golden(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("missing golden file: " + file.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// ---- shared sentinel fixtures (mirroring the golden files) ----

PersonalContext sentinel_context() {
    return {"user-7",
            {{"SENTINEL-PC-ALPHA stainless kettle", ItemKind::Purchase},
             {"SENTINEL-PC-BETA pour-over dripper", ItemKind::Purchase}}};
}

Guidance sentinel_guidance() {
    return {"SENTINEL-GUIDANCE categories: kitchen, coffee", "prompt"};
}

PersonalProfile sentinel_profile() {
    return {"SENTINEL-PROFILE this person brews coffee at home."};
}

MultipleChoiceQuery sentinel_query() {
    return {"SENTINEL-QUESTION Which product will this person buy next?",
            {"Option Alpha espresso machine", "Option Beta camping tent",
             "Option Gamma wrist watch", "Option Delta desk lamp"},
            0};
}

// ---- shared tiered mock scenario (also exercised by the test suite) ----

TaskInstance tiered_instance(char tier, int k) {
    char id[32];
    std::snprintf(id, sizeof id, "pref-%c-%03d", tier, k);
    TaskInstance inst;
    inst.instance_id = id;
    inst.task = TaskKind::PreferencePrediction;
    inst.context.user_id = std::string("user-") + tier + std::to_string(k);
    const std::string tag = std::string(1, tier) + std::to_string(k);
    inst.context.items = {
        {"PCMARK stainless kettle " + tag, ItemKind::Purchase},
        {"PCMARK ceramic mug " + tag, ItemKind::Purchase},
    };
    MultipleChoiceQuery q;
    q.stem = std::string("[T") +
             static_cast<char>(std::toupper(static_cast<unsigned char>(tier))) +
             "] Which product will this person buy next (case " +
             std::to_string(k) + ")?";
    q.options = {"alpha gadget", "beta gadget", "gamma gadget", "delta gadget"};
    q.answer_index = tier - 'a';
    inst.query = q;
    return inst;
}

MockScript tiered_script() {
    MockScript script;
    script.rules = {
        {MockRule::Kind::Contains, {"split by a comma:"},
         "kitchen, coffee GMARK"},
        {MockRule::Kind::ContainsAll,
         {"Write a short profile", "Product categories of the purchases above:"},
         "Keeps a tidy kitchen GPMARK."},
        {MockRule::Kind::Contains, {"Write a short profile"},
         "Keeps a tidy kitchen UPMARK."},
        {MockRule::Kind::Contains, {"[TA]"}, "A"},
        {MockRule::Kind::ContainsAll, {"[TB]", "PCMARK"}, "B"},
        {MockRule::Kind::ContainsAll, {"[TC]", "UPMARK"}, "C"},
        {MockRule::Kind::ContainsAll, {"[TC]", "GPMARK"}, "C"},
        {MockRule::Kind::ContainsAll, {"[TD]", "GPMARK"}, "D"},
    };
    script.default_response = "Sorry, I cannot tell from this.";
    return script;
}

struct E2EResult {
    std::vector<std::vector<double>> accuracies;  // per run, per strategy
    std::vector<std::string> reports;             // rendered bytes per run
    std::vector<int> provider_calls;              // per run
    double elapsed_ms = 0.0;
};

// 200 tiered instances, three full re-runs over one shared cache.
const E2EResult& shared_e2e() {
    static const E2EResult result = [] {
        const auto dir = fresh_dir("e2e");
        std::vector<TaskInstance> all;
        for (const char tier : {'a', 'b', 'c', 'd'}) {
            for (int k = 0; k < 50; ++k) all.push_back(tiered_instance(tier, k));
        }
        write_instances_jsonl(dir / "dataset.jsonl", all);

        ExperimentConfig config;
        config.task = TaskKind::PreferencePrediction;
        config.dataset = dir / "dataset.jsonl";
        config.strategies = {
            StrategyConfig::dg(false), StrategyConfig::dg(true),
            StrategyConfig::pg(),
            StrategyConfig::gpg_default(TaskKind::PreferencePrediction)};
        config.out_dir = dir / "out";

        const auto provider = std::make_shared<MockProvider>(tiered_script());
        const auto cache = std::make_shared<ResponseCache>(dir / "cache");

        E2EResult out;
        const auto start = std::chrono::steady_clock::now();
        for (int run = 0; run < 3; ++run) {
            Gateway gateway(provider, cache, {});
            const int before = provider->call_count();
            const auto report = run_experiment(config, gateway);
            std::vector<double> acc;
            for (const auto& row : report.rows) {
                acc.push_back(row.scores.at(0).percent());
            }
            out.accuracies.push_back(acc);
            out.reports.push_back(render_report(report, ReportFormat::Markdown));
            out.provider_calls.push_back(provider->call_count() - before);
        }
        out.elapsed_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        return out;
    }();
    return result;
}

// ---- criteria ----

Outcome golden_prompts() {
    const auto start = std::chrono::steady_clock::now();
    const auto pc = sentinel_context();
    const auto guidance = sentinel_guidance();
    const auto profile = sentinel_profile();
    const Query query = sentinel_query();
    int matched = 0;
    for (const auto& config : StrategyConfig::ablation_rows()) {
        const auto prompt =
            compose_final_prompt(config, TaskKind::PreferencePrediction, pc,
                                 guidance, profile, query);
        const auto golden = read_golden(
            kRepoDir / "tests" / "golden" / ("final_" + config.slug() + ".txt"));
        if (prompt != golden) {
            return {false, "prompt for " + config.slug() +
                               " differs from its golden file"};
        }
        const auto pos_pc = prompt.find("SENTINEL-PC-ALPHA");
        const auto pos_g = prompt.find("SENTINEL-GUIDANCE");
        const auto pos_pp = prompt.find("SENTINEL-PROFILE");
        const auto pos_q = prompt.find("SENTINEL-QUESTION");
        if ((pos_pc != std::string::npos) != config.flags.include_pc ||
            (pos_g != std::string::npos) != config.flags.include_guidance ||
            (pos_pp != std::string::npos) != config.flags.include_profile ||
            pos_q == std::string::npos) {
            return {false, config.slug() + ": segment flags not honored"};
        }
        size_t last = 0;
        for (const auto pos : {pos_pc, pos_g, pos_pp, pos_q}) {
            if (pos == std::string::npos) continue;
            if (pos < last) {
                return {false, config.slug() + ": segment order violated"};
            }
            last = pos;
        }
        ++matched;
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    if (ms >= 1000.0) {
        return {false, "composition took " + fmt2(ms) + " ms (budget 1000)"};
    }
    return {true, std::to_string(matched) +
                      "/10 rows byte-identical, order and flags hold, " +
                      fmt2(ms) + " ms"};
}

Outcome metric_oracles() {
    const auto pairs = oracle::metric_pairs();
    if (pairs.size() < 25) {
        return {false, "only " + std::to_string(pairs.size()) + " pairs"};
    }
    double worst = 0.0;
    for (const auto& [cand_text, ref_text] : pairs) {
        const auto cand = tokenize(cand_text);
        const auto ref = tokenize(ref_text);
        const std::vector<std::pair<double, double>> checks = {
            {bleu(cand, ref), oracle::bleu(cand, ref)},
            {rouge_n(cand, ref, 1), oracle::rouge_n(cand, ref, 1)},
            {rouge_n(cand, ref, 2), oracle::rouge_n(cand, ref, 2)},
            {rouge_l(cand, ref), oracle::rouge_l(cand, ref)},
            {meteor(cand, ref), oracle::meteor(cand, ref)},
        };
        for (const auto& [lib, oracle_value] : checks) {
            worst = std::max(worst, std::abs(lib - oracle_value));
        }
    }
    if (worst > 1e-9) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "max |lib - oracle| = %.3e", worst);
        return {false, buf};
    }

    const auto identity = tokenize("the cat sat on the mat");
    if (bleu(identity, identity) != 1.0 || rouge_n(identity, identity, 1) != 1.0 ||
        rouge_n(identity, identity, 2) != 1.0 ||
        rouge_l(identity, identity) != 1.0) {
        return {false, "identity pair is not exactly 1.0"};
    }
    const auto left = tokenize("completely different words here");
    const auto right = tokenize("nothing shared at all");
    if (bleu(left, right) != 0.0 || rouge_n(left, right, 1) != 0.0 ||
        rouge_n(left, right, 2) != 0.0 || rouge_l(left, right) != 0.0 ||
        meteor(left, right) != 0.0) {
        return {false, "disjoint pair is not exactly 0.0"};
    }
    const auto ten = tokenize("w w w w w w w w w w");
    if (std::abs(meteor(ten, ten) - 0.9995) > 1e-9) {
        return {false, "identical 10-token fragmentation penalty is not 0.9995"};
    }
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "%zu pairs x 5 metrics within 1e-9 (max delta %.1e), edges exact",
                  pairs.size(), worst);
    return {true, buf};
}

Outcome reference_arithmetic() {
    namespace ref = reference;
    double worst = 0.0;
    const auto check = [&worst](double computed, double published,
                                double tolerance) {
        worst = std::max(worst, std::abs(computed - published));
        return std::abs(computed - published) <= tolerance;
    };
    if (!check(relative_improvement(ref::kPreferenceDgNoPc,
                                    ref::kPreferenceDgWithPc),
               50.23, 0.05) ||
        !check(relative_improvement(ref::kPreferenceDgNoPc, ref::kPreferencePg),
               73.71, 0.05) ||
        !check(relative_improvement(ref::kPreferenceDgNoPc, ref::kPreferenceGpg),
               105.62, 0.05) ||
        !check(relative_improvement(ref::kPreferenceDgWithPc,
                                    ref::kPreferenceGpg),
               36.87, 0.05)) {
        return {false, "relative improvements off by " + fmt2(worst) + " pp"};
    }
    const double gain_ratio =
        (ref::kPreferenceGpgNoPc - ref::kPreferenceDgWithPc) /
        (ref::kPreferenceGpg - ref::kPreferenceDgWithPc) * 100.0;
    if (!check(gain_ratio, 61.04, 0.05)) {
        return {false, "gain ratio " + fmt2(gain_ratio) + " != 61.04"};
    }
    const double meteor_delta =
        ref::kAblation[6].meteor - ref::kAblation[0].meteor;
    if (std::abs(meteor_delta - 2.24) > 1e-9) {
        return {false, "guidance delta " + fmt2(meteor_delta) + " != 2.24"};
    }
    for (size_t i = 0; i < ref::kOutcome.size(); ++i) {
        const auto& row = ref::kOutcome[i];
        const double sum = row.correct + row.incorrect + row.abstain;
        if (std::abs(sum - 100.0) > 0.02) {
            return {false, "outcome row " + std::to_string(i) + " sums to " +
                               fmt2(sum)};
        }
    }
    return {true,
            "50.23/73.71/105.62/36.87/61.04 within 0.05 pp, guidance delta "
            "2.24, outcome rows sum to 100 +/- 0.02"};
}

Outcome e2e_ordering() {
    const auto& e2e = shared_e2e();
    for (const auto& acc : e2e.accuracies) {
        for (size_t i = 1; i < acc.size(); ++i) {
            if (!(acc[i - 1] < acc[i])) {
                return {false, "ordering violated: " + fmt2(acc[i - 1]) +
                                   " !< " + fmt2(acc[i])};
            }
        }
    }
    if (e2e.reports[1] != e2e.reports[0] || e2e.reports[2] != e2e.reports[0]) {
        return {false, "re-runs produced different report bytes"};
    }
    if (e2e.elapsed_ms >= 10000.0) {
        return {false, "three runs took " + fmt2(e2e.elapsed_ms) +
                           " ms (budget 10000)"};
    }
    const auto& acc = e2e.accuracies.front();
    return {true, "200 instances x 3 runs: " + fmt2(acc[0]) + " < " +
                      fmt2(acc[1]) + " < " + fmt2(acc[2]) + " < " +
                      fmt2(acc[3]) + ", identical bytes, " +
                      fmt2(e2e.elapsed_ms) + " ms"};
}

Outcome builder_properties() {
    std::mt19937 gen(7331);
    std::vector<std::string> categories;
    for (int c = 0; c < 40; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "cat-%02d", c);
        categories.emplace_back(buf);
    }
    std::vector<PurchaseRecord> log;
    std::unordered_map<std::string, std::set<std::string>> cats_of;
    for (int u = 0; u < 1000; ++u) {
        char uid[16];
        std::snprintf(uid, sizeof uid, "u%04d", u);
        std::vector<size_t> index(categories.size());
        for (size_t i = 0; i < index.size(); ++i) index[i] = i;
        std::shuffle(index.begin(), index.end(), gen);
        const size_t count = 3 + gen() % 6;  // 3..8 categories
        for (size_t c = 0; c < count; ++c) {
            const auto& cat = categories[index[c]];
            const size_t products = 1 + gen() % 3;
            for (size_t k = 0; k < products; ++k) {
                log.push_back({uid,
                               "p-" + std::string(uid) + "-" + cat + "-" +
                                   std::to_string(k),
                               cat});
                cats_of[uid].insert(cat);
            }
        }
    }

    const auto build = build_preference_dataset(log, 42);
    const auto rebuild = build_preference_dataset(log, 42);
    if (instances_to_jsonl(build.instances) !=
        instances_to_jsonl(rebuild.instances)) {
        return {false, "rebuild with the same seed is not byte-identical"};
    }

    std::unordered_map<std::string, std::string> category_of_title;
    for (const auto& record : log) {
        category_of_title[record.product_title] = record.category;
    }
    std::unordered_set<std::string> instance_users;
    for (const auto& inst : build.instances) {
        const auto& q = std::get<MultipleChoiceQuery>(inst.query);
        instance_users.insert(inst.context.user_id);
        const std::set<std::string> distinct(q.options.begin(), q.options.end());
        if (q.options.size() != 4 || distinct.size() != 4) {
            return {false, inst.instance_id + ": options not 4 distinct"};
        }
        const auto& purchased = cats_of.at(inst.context.user_id);
        int from_purchased = 0;
        for (size_t i = 0; i < q.options.size(); ++i) {
            if (purchased.count(category_of_title.at(q.options[i]))) {
                ++from_purchased;
                if (static_cast<int>(i) != q.answer_index) {
                    return {false, inst.instance_id +
                                       ": purchased-category option is not "
                                       "the answer"};
                }
            }
        }
        if (from_purchased != 1) {
            return {false, inst.instance_id + ": " +
                               std::to_string(from_purchased) +
                               " options from purchased categories"};
        }
        const auto& answer = q.options[static_cast<size_t>(q.answer_index)];
        for (const auto& item : inst.context.items) {
            if (item.text == answer) {
                return {false, inst.instance_id + ": answer leaked into the "
                                                  "context"};
            }
        }
    }
    int thin_users_emitting = 0;
    for (const auto& [uid, cats] : cats_of) {
        if (cats.size() < 5 && instance_users.count(uid)) ++thin_users_emitting;
    }
    if (thin_users_emitting != 0) {
        return {false, std::to_string(thin_users_emitting) +
                           " users with <5 categories emitted instances"};
    }
    return {true, std::to_string(build.instances.size()) +
                      " instances from 1000 users, one purchased-category "
                      "option each, answers out of context, rebuild identical"};
}

Outcome dialogue_band() {
    const double t39 = 0.39, t41 = 0.41, t61 = 0.61;
    TableEmbedder embedder({
        {"h39", {1.0, 0.0}},
        {"r39", {t39, std::sqrt(1.0 - t39 * t39)}},
        {"h40", {1.0, 2.0, 0.0}},
        {"r40", {0.0, 1.0, 2.0}},
        {"h41", {1.0, 0.0}},
        {"r41", {t41, std::sqrt(1.0 - t41 * t41)}},
        {"h60", {1.0, 2.0, 0.0}},
        {"r60", {-1.0, 2.0, 0.0}},
        {"h61", {1.0, 0.0}},
        {"r61", {t61, std::sqrt(1.0 - t61 * t61)}},
    });
    std::vector<DialogueCandidate> candidates;
    for (const auto* tag : {"39", "40", "41", "60", "61"}) {
        candidates.push_back({std::string("du-") + tag,
                              {std::string("h") + tag},
                              "any pets?",
                              std::string("r") + tag});
    }
    const auto build = build_dialogue_subset(candidates, embedder);
    if (!build.unresolved.empty()) {
        return {false, std::to_string(build.unresolved.size()) +
                           " candidates unresolved"};
    }
    if (build.instances.size() != 2 || build.dropped != 3) {
        return {false, "kept " + std::to_string(build.instances.size()) +
                           ", dropped " + std::to_string(build.dropped)};
    }
    if (build.instances[0].instance_id != "dialogue-du-41-0" ||
        build.instances[1].instance_id != "dialogue-du-60-0") {
        return {false, "kept the wrong candidates: " +
                           build.instances[0].instance_id + ", " +
                           build.instances[1].instance_id};
    }
    if (std::abs(build.similarities[0] - 0.41) > 1e-9 ||
        std::abs(build.similarities[1] - 0.60) > 1e-12) {
        return {false, "kept similarities " + fmt2(build.similarities[0]) +
                           ", " + fmt2(build.similarities[1])};
    }
    return {true, "similarities {0.39, 0.40, 0.41, 0.60, 0.61} -> kept "
                  "{0.41, 0.60}: 0.40 fails the strict lower bound, 0.60 "
                  "passes the inclusive upper"};
}

Outcome cache_and_abstain() {
    const auto& e2e = shared_e2e();
    if (e2e.provider_calls[1] != 0 || e2e.provider_calls[2] != 0) {
        return {false, "warm re-runs made " +
                           std::to_string(e2e.provider_calls[1]) + " and " +
                           std::to_string(e2e.provider_calls[2]) +
                           " provider calls"};
    }
    if (e2e.reports[1] != e2e.reports[0] || e2e.reports[2] != e2e.reports[0]) {
        return {false, "warm re-run report bytes differ"};
    }

    const std::vector<std::string> options = {"alpha", "beta", "gamma",
                                              "delta"};
    std::vector<std::pair<std::string, bool>> corpus = {
        {"sorry", true},
        {"Sorry", true},
        {"SORRY", true},
        {"sOrRy", true},
        {"I'm sorry, I can't tell.", true},
        {"We are SORRY about this.", true},
        {"sorry!", true},
        {"A. sorry", true},
        {"The answer is B, sorry.", true},
        {"sorrynotsorry", true},
        {"  sorry  ", true},
        {"Unfortunately I must say sorry.", true},
        {"A", false},
        {"B", false},
        {"C", false},
        {"D", false},
        {"The answer is A.", false},
        {"beta", false},
        {"sort of unclear", false},
        {"a sore subject", false},
        {"so rry", false},
        {"I choose C", false},
        {"sorr y", false},
        {"SORRO", false},
    };
    for (int k = 0; static_cast<int>(corpus.size()) < 50; ++k) {
        if (corpus.size() % 2 == 0) {
            corpus.push_back(
                {"case " + std::to_string(k) + ": Sorry, no idea.", true});
        } else {
            corpus.push_back({"case " + std::to_string(k) + ": pick D", false});
        }
    }
    int misclassified = 0;
    for (const auto& [generation, expect_abstain] : corpus) {
        const auto outcome = parse_choice(generation, options);
        const bool abstained = outcome.kind == ChoiceOutcome::Kind::Abstain;
        if (abstained != expect_abstain) ++misclassified;
    }
    if (misclassified != 0) {
        return {false, std::to_string(misclassified) +
                           " of 50 abstain classifications wrong"};
    }
    return {true, "warm re-runs made 0 provider calls with identical report "
                  "bytes; 50-case abstain corpus fully correct"};
}

Outcome stage_arithmetic() {
    MockScript script;
    script.rules = {
        {MockRule::Kind::Contains, {"split by a comma:"}, "Kitchen, Coffee"},
        {MockRule::Kind::Contains,
         {"most distinctive feature of the above tweets?"}, "2. Emoji"},
        {MockRule::Kind::Contains, {"\"self-description\":"},
         "Has two cats, lives in Lyon."},
        {MockRule::Kind::Contains, {"Write a short profile"},
         "Loves compact coffee gear."},
        {MockRule::Kind::Contains, {"Answer with a single letter"}, "B"},
    };
    script.default_response = "A perfectly ordinary reply.";

    const auto instance_for = [](TaskKind task) {
        TaskInstance inst;
        inst.task = task;
        inst.context.user_id = "probe";
        switch (task) {
            case TaskKind::PreferencePrediction:
                inst.instance_id = "preference-probe-0";
                inst.context.items = {{"stainless kettle", ItemKind::Purchase},
                                      {"pour-over dripper", ItemKind::Purchase}};
                inst.query = sentinel_query();
                break;
            case TaskKind::TextParaphrase:
                inst.instance_id = "paraphrase-probe-0";
                inst.context.items = {{"omg SO good!!", ItemKind::Tweet},
                                      {"need caffeine rn", ItemKind::Tweet}};
                inst.query = ParaphraseQuery{"This coffee is very good.",
                                             "omg this coffee is SO good!!"};
                break;
            case TaskKind::DialogueResponse:
                inst.instance_id = "dialogue-probe-0";
                inst.context.items = {{"I have two cats", ItemKind::Comment}};
                inst.query = DialogueQuery{"Any pets?", "Two cats."};
                break;
        }
        return inst;
    };

    std::string summary;
    int checked = 0;
    for (const auto task :
         {TaskKind::PreferencePrediction, TaskKind::TextParaphrase,
          TaskKind::DialogueResponse}) {
        const auto inst = instance_for(task);
        const std::vector<std::pair<StrategyConfig, int>> expectations = {
            {StrategyConfig::dg(true), 0},
            {StrategyConfig::pg(), 1},
            {StrategyConfig::gpg_default(task), 2},
        };
        for (const auto& [config, intermediate] : expectations) {
            const auto dir = fresh_dir(
                "stages-" + std::string(to_string(task)) + "-" + config.slug());
            Gateway gateway(std::make_shared<MockProvider>(script),
                            std::make_shared<ResponseCache>(dir), {});
            const auto record =
                run_instance(config, inst, gateway, "gpt-3.5-turbo-1106");
            if (record.failed) {
                return {false, std::string(to_string(task)) + "/" +
                                   config.slug() + " failed: " + record.error};
            }
            if (record.llm_calls != intermediate + 1 ||
                record.cache_hits != 0) {
                return {false, std::string(to_string(task)) + "/" +
                                   config.slug() + ": " +
                                   std::to_string(record.llm_calls) +
                                   " calls (wanted " +
                                   std::to_string(intermediate + 1) + ")"};
            }
            ++checked;
        }
    }
    (void)summary;
    return {true, std::to_string(checked) +
                      " strategy/task pairs: intermediate calls 0 (direct), "
                      "1 (profile), 2 (guided) on every task"};
}

}  // namespace

int main() {
    using Criterion = std::pair<const char*, std::function<Outcome()>>;
    const std::vector<Criterion> criteria = {
        {"final prompts match the golden files", golden_prompts},
        {"text metrics agree with brute-force oracles", metric_oracles},
        {"published reference arithmetic reproduces", reference_arithmetic},
        {"mock end-to-end run orders the strategies", e2e_ordering},
        {"preference builder properties hold on a 1000-user log",
         builder_properties},
        {"dialogue similarity band keeps exactly the in-band candidates",
         dialogue_band},
        {"warm cache re-runs are provider-free and abstain detection is exact",
         cache_and_abstain},
        {"intermediate stage calls are 0/1/2 by strategy", stage_arithmetic},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] criterion %zu: %s (%s)\n",
                    outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    outcome.detail.c_str());
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failing\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passing\n", criteria.size());
    return 0;
}
