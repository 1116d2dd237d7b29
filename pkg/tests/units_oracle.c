/* Brute-force reference for minimal aligned units, used by the acceptance
 * suite to exhaustively cross-check the library implementation.
 *
 * Independent algorithm: for every link, find the smallest (area, then
 * lexicographic) consistent contiguous span pair containing it by scanning
 * all span pairs; then repeatedly merge units whose spans overlap on either
 * axis, re-extending each merge to the smallest consistent pair containing
 * the merged bounds.
 *
 * Usage:
 *   units_oracle enum N M      enumerate all 2^(N*M) link masks in order
 *   units_oracle cases         read "N M hexmask" lines from stdin
 *
 * Output: one line per mask; units as "s0-s1:t0-t1/count" fields sorted by
 * (s0, s1, t0, t1), space separated; empty line when there are no links.
 */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define MAXN 8
#define MAXSPANS (MAXN * (MAXN + 1) / 2)
#define MAXPAIRS (MAXSPANS * MAXSPANS)

typedef struct {
    int a0, a1, b0, b1;
    uint64_t region;   /* cells inside the span pair */
    uint64_t bad;      /* cells that break consistency when linked */
    int area;
} SpanPair;

static int N, M;
static SpanPair pairs[MAXPAIRS];
static int n_pairs;
/* For each cell, indices into pairs[] of containing span pairs, sorted by
 * (area, a0, a1, b0, b1); pairs[] itself is built in that order. */
static int containing[MAXN * MAXN][MAXPAIRS];
static int n_containing[MAXN * MAXN];

static uint64_t cell_bit(int i, int j) { return 1ULL << (i * M + j); }

static int cmp_pair(const void *pa, const void *pb)
{
    const SpanPair *a = pa, *b = pb;
    if (a->area != b->area) return a->area - b->area;
    if (a->a0 != b->a0) return a->a0 - b->a0;
    if (a->a1 != b->a1) return a->a1 - b->a1;
    if (a->b0 != b->b0) return a->b0 - b->b0;
    return a->b1 - b->b1;
}

static void build_tables(void)
{
    n_pairs = 0;
    for (int a0 = 0; a0 < N; a0++)
        for (int a1 = a0 + 1; a1 <= N; a1++)
            for (int b0 = 0; b0 < M; b0++)
                for (int b1 = b0 + 1; b1 <= M; b1++) {
                    SpanPair *p = &pairs[n_pairs++];
                    p->a0 = a0; p->a1 = a1; p->b0 = b0; p->b1 = b1;
                    p->area = (a1 - a0) * (b1 - b0);
                    p->region = 0;
                    uint64_t rowband = 0, colband = 0;
                    for (int i = 0; i < N; i++)
                        for (int j = 0; j < M; j++) {
                            int in_rows = (a0 <= i && i < a1);
                            int in_cols = (b0 <= j && j < b1);
                            if (in_rows && in_cols) p->region |= cell_bit(i, j);
                            if (in_rows) rowband |= cell_bit(i, j);
                            if (in_cols) colband |= cell_bit(i, j);
                        }
                    p->bad = (rowband | colband) & ~p->region;
                }
    qsort(pairs, n_pairs, sizeof(SpanPair), cmp_pair);
    for (int c = 0; c < N * M; c++) n_containing[c] = 0;
    for (int k = 0; k < n_pairs; k++)
        for (int i = pairs[k].a0; i < pairs[k].a1; i++)
            for (int j = pairs[k].b0; j < pairs[k].b1; j++) {
                int c = i * M + j;
                containing[c][n_containing[c]++] = k;
            }
}

/* Smallest consistent span pair containing [a0,a1)x[b0,b1); walks the
 * containing list of one corner cell and filters by containment. */
static int smallest_containing(uint64_t mask, int a0, int a1, int b0, int b1)
{
    int c = a0 * M + b0;
    for (int t = 0; t < n_containing[c]; t++) {
        const SpanPair *p = &pairs[containing[c][t]];
        if (p->a0 > a0 || p->a1 < a1 || p->b0 > b0 || p->b1 < b1) continue;
        if ((mask & p->bad) == 0) return containing[c][t];
    }
    return -1; /* unreachable: the full grid is always consistent */
}

typedef struct { int a0, a1, b0, b1; } Unit;

static int cmp_unit(const void *pa, const void *pb)
{
    const Unit *a = pa, *b = pb;
    if (a->a0 != b->a0) return a->a0 - b->a0;
    if (a->a1 != b->a1) return a->a1 - b->a1;
    if (a->b0 != b->b0) return a->b0 - b->b0;
    return a->b1 - b->b1;
}

static void solve(uint64_t mask, char *out)
{
    Unit units[MAXN * MAXN];
    int n_units = 0;
    if (mask == 0) { out[0] = '\0'; return; }

    for (int c = 0; c < N * M; c++) {
        if (!(mask & (1ULL << c))) continue;
        int i = c / M, j = c % M;
        int k = smallest_containing(mask, i, i + 1, j, j + 1);
        const SpanPair *p = &pairs[k];
        int dup = 0;
        for (int u = 0; u < n_units; u++)
            if (units[u].a0 == p->a0 && units[u].a1 == p->a1 &&
                units[u].b0 == p->b0 && units[u].b1 == p->b1) { dup = 1; break; }
        if (!dup) {
            units[n_units].a0 = p->a0; units[n_units].a1 = p->a1;
            units[n_units].b0 = p->b0; units[n_units].b1 = p->b1;
            n_units++;
        }
    }

    int changed = 1;
    while (changed) {
        changed = 0;
        for (int u = 0; u < n_units && !changed; u++)
            for (int v = u + 1; v < n_units && !changed; v++) {
                int so = units[u].a0 < units[v].a1 && units[v].a0 < units[u].a1;
                int to = units[u].b0 < units[v].b1 && units[v].b0 < units[u].b1;
                if (!so && !to) continue;
                int a0 = units[u].a0 < units[v].a0 ? units[u].a0 : units[v].a0;
                int a1 = units[u].a1 > units[v].a1 ? units[u].a1 : units[v].a1;
                int b0 = units[u].b0 < units[v].b0 ? units[u].b0 : units[v].b0;
                int b1 = units[u].b1 > units[v].b1 ? units[u].b1 : units[v].b1;
                int k = smallest_containing(mask, a0, a1, b0, b1);
                const SpanPair *p = &pairs[k];
                units[u].a0 = p->a0; units[u].a1 = p->a1;
                units[u].b0 = p->b0; units[u].b1 = p->b1;
                units[v] = units[--n_units];
                /* The re-extended unit may now duplicate another. */
                for (int w = 0; w < n_units; w++)
                    if (w != u && units[w].a0 == units[u].a0 &&
                        units[w].a1 == units[u].a1 &&
                        units[w].b0 == units[u].b0 &&
                        units[w].b1 == units[u].b1) {
                        units[w] = units[--n_units];
                        break;
                    }
                changed = 1;
            }
    }

    qsort(units, n_units, sizeof(Unit), cmp_unit);
    char *w = out;
    for (int u = 0; u < n_units; u++) {
        uint64_t region = 0;
        for (int i = units[u].a0; i < units[u].a1; i++)
            for (int j = units[u].b0; j < units[u].b1; j++)
                region |= cell_bit(i, j);
        int count = __builtin_popcountll(mask & region);
        w += sprintf(w, "%s%d-%d:%d-%d/%d", u ? " " : "", units[u].a0,
                     units[u].a1, units[u].b0, units[u].b1, count);
    }
    *w = '\0';
}

int main(int argc, char **argv)
{
    char line[4096];
    if (argc >= 4 && strcmp(argv[1], "enum") == 0) {
        N = atoi(argv[2]);
        M = atoi(argv[3]);
        if (N < 1 || M < 1 || N > MAXN || M > MAXN || N * M > 30) return 2;
        build_tables();
        uint64_t total = 1ULL << (N * M);
        for (uint64_t mask = 0; mask < total; mask++) {
            solve(mask, line);
            puts(line);
        }
        return 0;
    }
    if (argc >= 2 && strcmp(argv[1], "cases") == 0) {
        char buf[128];
        int last_n = -1, last_m = -1;
        while (fgets(buf, sizeof buf, stdin)) {
            unsigned long long mask;
            int n, m;
            if (sscanf(buf, "%d %d %llx", &n, &m, &mask) != 3) return 2;
            if (n < 1 || m < 1 || n > MAXN || m > MAXN) return 2;
            if (n != last_n || m != last_m) {
                N = n; M = m;
                build_tables();
                last_n = n; last_m = m;
            }
            solve((uint64_t)mask, line);
            puts(line);
        }
        return 0;
    }
    fprintf(stderr, "usage: %s enum N M | cases\n", argv[0]);
    return 2;
}
