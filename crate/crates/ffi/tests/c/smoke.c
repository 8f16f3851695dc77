#include <stdio.h>
#include <string.h>

#include "thinorbits.h"

static int fail(const char *what) {
  const char *e = thinorbits_last_error();
  fprintf(stderr, "%s: %s\n", what, e ? e : "(no message)");
  return 1;
}

int main(void) {
  ThinorbitsPell *p = NULL;
  char *t = NULL, *s = NULL;
  if (thinorbits_pell_solve("13", 4, &p) != THINORBITS_STATUS_OK) return fail("pell");
  if (thinorbits_pell_get(p, &t, &s) != THINORBITS_STATUS_OK) return fail("get");
  printf("%s %s\n", t, s);
  thinorbits_string_free(t);
  thinorbits_string_free(s);
  thinorbits_pell_free(p);

  ThinorbitsClassGroup *g = NULL;
  if (thinorbits_class_group_new("-23", &g) != THINORBITS_STATUS_OK) return fail("class group");
  printf("%zu\n", thinorbits_class_group_h(g));
  thinorbits_class_group_free(g);

  ThinorbitsSurd *x = NULL;
  if (thinorbits_surd_new("1", "1", "4", &x) != THINORBITS_STATUS_SQUARE_DISCRIMINANT) return 1;
  printf("%s\n", strchr(thinorbits_last_error(), ':') ? "error" : "?");
  return 0;
}
