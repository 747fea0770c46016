#pragma once

// Reference results reported for the original gpt-3.5-turbo-1106 runs on
// the full corpora. Desk re-runs cannot reproduce them (deprecated
// checkpoint, non-redistributable data); they are shipped to anchor the
// report footers and the arithmetic regression tests.

#include <array>

namespace pforge::reference {

// preference prediction accuracy, percent
inline constexpr double kPreferenceRandom = 25.00;
inline constexpr double kPreferenceDgNoPc = 31.65;
inline constexpr double kPreferenceDgWithPc = 47.55;
inline constexpr double kPreferencePg = 54.98;
inline constexpr double kPreferenceGpg = 65.08;
inline constexpr double kPreferenceGpgNoPc = 58.25;

// ablation grid, one row per entry of StrategyConfig::ablation_rows(),
// in the same order
struct AblationRow {
    double accuracy;  // preference
    double rouge1, rouge2, meteor, rouge_l, bleu;  // paraphrase
};

inline constexpr std::array<AblationRow, 10> kAblation = {{
    {47.55, 35.21, 14.27, 42.22, 32.46, 10.43},  // DG w/ PC
    {31.65, 33.40, 12.74, 40.76, 30.86, 9.27},   // DG w/o PC
    {54.98, 35.97, 14.88, 43.59, 33.25, 11.09},  // PG
    {51.86, 34.25, 13.57, 42.04, 31.65, 9.95},   // PG w/o PC
    {65.08, 36.12, 15.14, 43.87, 33.55, 11.23},  // GPG [PC,PP]
    {58.25, 33.96, 13.43, 43.50, 31.41, 10.10},  // GPG [PP]
    {61.96, 36.56, 15.43, 44.46, 33.99, 11.37},  // GPG [PC,G,PP]
    {59.14, 35.90, 14.62, 44.45, 33.32, 10.81},  // GPG [G,PP]
    {51.71, 35.69, 14.75, 43.07, 33.11, 10.79},  // GPG [PC,G]
    {48.44, 35.04, 13.84, 42.52, 32.42, 10.10},  // GPG [G]
}};

// outcome split on the preference task, percent of all answers
struct OutcomeRow {
    double correct, incorrect, abstain;
};

inline constexpr std::array<OutcomeRow, 4> kOutcome = {{
    {27.79, 55.27, 16.94},  // DG w/o PC
    {41.46, 32.39, 26.15},  // DG w/ PC
    {52.30, 34.92, 12.78},  // PG
    {64.04, 31.20, 4.75},   // GPG
}};

// dialogue response generation: sentence-embedding cosine and
// token-embedding F1, percent
struct DialogueRow {
    double embed_cosine, bertscore;
};

inline constexpr std::array<DialogueRow, 4> kDialogue = {{
    {29.86, 83.09},  // DG w/o PC
    {32.31, 83.54},  // DG w/ PC
    {32.66, 83.47},  // PG
    {32.35, 83.43},  // GPG
}};

// dataset statistics: instance count, mean activities per context
struct DatasetStat {
    int count;
    double mean_activities;
};

inline constexpr DatasetStat kPreferenceStats{673, 6.82};
inline constexpr DatasetStat kParaphraseStats{1500, 17.64};
inline constexpr DatasetStat kDialogueStats{607, 10.00};

// The best-config preference accuracy appears as 65.08 in the strategy
// comparison and as 64.04 (correct-answer share) in the outcome split;
// both are kept, the discrepancy is surfaced verbatim in report footers.
inline constexpr double kPreferenceGpgOutcomeCorrect = 64.04;

}  // namespace pforge::reference
