#include <stdio.h>
#include <string.h>
#include "substrate.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed: %s (line %d)\n", #cond, __LINE__); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    SubstrateRule *rule = NULL;
    CHECK(substrate_rule_builtin("mask5", &rule) == SUBSTRATE_STATUS_OK);
    CHECK(substrate_rule_dim(rule) == 1);
    CHECK(substrate_rule_alphabet_size(rule) == 5);

    SubstratePattern *pa = NULL;
    CHECK(substrate_pattern_new(rule, "P_A", 1, &pa) == SUBSTRATE_STATUS_OK);
    SubstrateReport *fibre = NULL;
    CHECK(substrate_fibre(pa, 2, &fibre) == SUBSTRATE_STATUS_OK);
    CHECK(substrate_report_count(fibre) == 25);
    CHECK(strstr(substrate_report_json(fibre), "\"count\":25") != NULL);
    substrate_report_free(fibre);
    substrate_pattern_free(pa);

    SubstrateRule *bad = NULL;
    CHECK(substrate_rule_builtin("no_such_rule", &bad) == SUBSTRATE_STATUS_INVALID);
    CHECK(bad == NULL);
    CHECK(strstr(substrate_last_error(), "unknown_builtin") != NULL);

    substrate_rule_free(rule);
    printf("ok %s\n", substrate_version());
    return 0;
}
