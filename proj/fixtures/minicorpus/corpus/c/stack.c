#define STACK_MAX 64

struct stack {
  int items[STACK_MAX];
  int top;
};

void stack_init(struct stack *s) { s->top = 0; }

int stack_push(struct stack *s, int v) {
  if (s->top >= STACK_MAX) {
    return 0;
  }
  s->items[s->top++] = v;
  return 1;
}

int stack_pop(struct stack *s, int *out) {
  if (s->top == 0) {
    return 0;
  }
  *out = s->items[--s->top];
  return 1;
}

int stack_peek(const struct stack *s) {
  return s->items[s->top - 1];
}
